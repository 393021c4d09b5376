//! Noise models and shift sampling for the Monte-Carlo harness.

use anyhow::{bail, Result};
use kmwm::bits::Bits;
use kmwm::gkp::GkpSurfaceCode;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseModel {
    /// iid N(0, sigma^2) displacement on every quadrature.
    Gaussian { sigma: f64 },
    /// iid Pauli channel per mode, realized as discrete sqrt(pi)-scaled
    /// shifts through the code's shape matrices.
    IidPauli { eps_x: f64, eps_y: f64, eps_z: f64 },
}

impl NoiseModel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            NoiseModel::Gaussian { sigma } => {
                if !(sigma > 0.0 && sigma.is_finite()) {
                    bail!("sigma must be positive, got {sigma}");
                }
            }
            NoiseModel::IidPauli { eps_x, eps_y, eps_z } => {
                let total = eps_x + eps_y + eps_z;
                if eps_x < 0.0 || eps_y < 0.0 || eps_z < 0.0 {
                    bail!("error rates must be nonnegative");
                }
                if !(total > 0.0 && total < 0.75) {
                    bail!("total error rate must lie in (0, 3/4), got {total}");
                }
            }
        }
        Ok(())
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            NoiseModel::Gaussian { .. } => "sigma",
            NoiseModel::IidPauli { .. } => "epsilon",
        }
    }

    pub fn value_string(&self) -> String {
        match *self {
            NoiseModel::Gaussian { sigma } => format!("{sigma}"),
            NoiseModel::IidPauli { eps_x, eps_y, eps_z } => {
                if eps_x == 0.0 && eps_y == 0.0 {
                    format!("{eps_z}")
                } else {
                    format!("{eps_x},{eps_y},{eps_z}")
                }
            }
        }
    }
}

/// Deterministic per-trial stream: a splitmix64 hash of (seed, index) seeds
/// an independent ChaCha stream, so results do not depend on scheduling.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut z = seed ^ trial.wrapping_mul(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    ChaCha8Rng::seed_from_u64(z ^ (z >> 31))
}

fn uniform01(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
}

/// Standard normal pair by the Box-Muller transform of two uniforms.
fn gaussian_pair(rng: &mut ChaCha8Rng) -> (f64, f64) {
    let u1 = loop {
        let u = uniform01(rng);
        if u > 0.0 {
            break u;
        }
    };
    let u2 = uniform01(rng);
    let r = (-2.0 * u1.ln()).sqrt();
    let theta = 2.0 * std::f64::consts::PI * u2;
    (r * theta.cos(), r * theta.sin())
}

/// Sample a physical displacement for all 2N quadratures of `code`.
pub fn sample_shift(model: &NoiseModel, code: &GkpSurfaceCode, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let n = code.n_modes();
    match *model {
        NoiseModel::Gaussian { sigma } => {
            let mut out = Vec::with_capacity(2 * n);
            while out.len() < 2 * n {
                let (a, b) = gaussian_pair(rng);
                out.push(a * sigma);
                if out.len() < 2 * n {
                    out.push(b * sigma);
                }
            }
            out
        }
        NoiseModel::IidPauli { eps_x, eps_y, eps_z } => {
            let mut x_part = Bits::new();
            let mut z_part = Bits::new();
            for m in 0..n {
                let u = uniform01(rng);
                // category order: I, X, Y, Z
                let eps_i = 1.0 - eps_x - eps_y - eps_z;
                if u < eps_i {
                    continue;
                } else if u < eps_i + eps_x {
                    x_part.insert(m);
                } else if u < eps_i + eps_x + eps_y {
                    x_part.insert(m);
                    z_part.insert(m);
                } else {
                    z_part.insert(m);
                }
            }
            let root_pi = std::f64::consts::PI.sqrt();
            code.discrete_shift(&x_part, &z_part)
                .into_iter()
                .map(|v| v * root_pi)
                .collect()
        }
    }
}

/// Sample an iid binary error vector with probability `eps` per qubit.
pub fn sample_binary_error(n: usize, eps: f64, rng: &mut ChaCha8Rng) -> Bits {
    let mut bits = Bits::new();
    for q in 0..n {
        if uniform01(rng) < eps {
            bits.insert(q);
        }
    }
    bits
}

#[cfg(test)]
mod tests {
    use super::*;
    use kmwm::code::CssCode;

    #[test]
    fn gaussian_sample_variance() {
        let css = CssCode::rotated_surface(3).unwrap();
        let code = GkpSurfaceCode::square(css).unwrap();
        let sigma = 0.6;
        let model = NoiseModel::Gaussian { sigma };
        let mut rng = trial_rng(1, 0);
        let n_samples = 100_000 / (2 * code.n_modes()) + 1;
        let mut values = Vec::new();
        for _ in 0..n_samples {
            values.extend(sample_shift(&model, &code, &mut rng));
        }
        let n = values.len() as f64;
        let mean: f64 = values.iter().sum::<f64>() / n;
        let var: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
        // five standard errors of the sample variance
        let se = sigma * sigma * (2.0 / (n - 1.0)).sqrt();
        assert!(
            (var - sigma * sigma).abs() < 5.0 * se,
            "variance {var} vs {}",
            sigma * sigma
        );
    }

    #[test]
    fn pure_z_shift_rate() {
        let css = CssCode::rotated_surface(3).unwrap();
        let code = GkpSurfaceCode::square(css).unwrap();
        let eps = 0.1;
        let model = NoiseModel::IidPauli { eps_x: 0.0, eps_y: 0.0, eps_z: eps };
        let mut rng = trial_rng(2, 0);
        let n = code.n_modes();
        let trials = 100_000 / n + 1;
        let mut flips = 0usize;
        let mut total = 0usize;
        let root_pi = std::f64::consts::PI.sqrt();
        for _ in 0..trials {
            let shift = sample_shift(&model, &code, &mut rng);
            for m in 0..n {
                assert_eq!(shift[m], 0.0, "pure-Z noise never shifts q");
                total += 1;
                if shift[n + m] != 0.0 {
                    assert!((shift[n + m] - root_pi).abs() < 1e-12);
                    flips += 1;
                }
            }
        }
        let frac = flips as f64 / total as f64;
        let se = (eps * (1.0 - eps) / total as f64).sqrt();
        assert!((frac - eps).abs() < 5.0 * se, "rate {frac}");
    }

    #[test]
    fn zero_sigma_rejected_and_streams_reproducible() {
        assert!(NoiseModel::Gaussian { sigma: 0.0 }.validate().is_err());
        assert!(NoiseModel::IidPauli { eps_x: 0.3, eps_y: 0.3, eps_z: 0.3 }
            .validate()
            .is_err());
        let css = CssCode::rotated_surface(3).unwrap();
        let code = GkpSurfaceCode::square(css).unwrap();
        let model = NoiseModel::Gaussian { sigma: 0.5 };
        let a = sample_shift(&model, &code, &mut trial_rng(7, 3));
        let b = sample_shift(&model, &code, &mut trial_rng(7, 3));
        assert_eq!(a, b);
        let c = sample_shift(&model, &code, &mut trial_rng(7, 4));
        assert_ne!(a, c);
    }
}
