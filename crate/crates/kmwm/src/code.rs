//! CSS stabilizer codes, their per-sector views, and logical class labels.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::bits::Bits;

/// Which single-type error family a decoding graph is built for.
///
/// `XErrors` means the physical errors are X strings, detected by the Z-type
/// checks; `ZErrors` the converse.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorSector {
    XErrors,
    ZErrors,
}

/// A CSS stabilizer code given by binary check rows and one logical pair.
#[derive(Debug, Clone)]
pub struct CssCode {
    pub n_qubits: usize,
    pub x_checks: Vec<Bits>,
    pub z_checks: Vec<Bits>,
    pub logical_x: Bits,
    pub logical_z: Bits,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CodeError {
    NonCommutingChecks { x: usize, z: usize },
    LogicalsCommute,
    LogicalAnticommutesCheck(String),
    BadDistance(usize),
}

impl fmt::Display for CodeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CodeError::NonCommutingChecks { x, z } => {
                write!(f, "X check {x} and Z check {z} anticommute")
            }
            CodeError::LogicalsCommute => write!(f, "logical X and Z operators commute"),
            CodeError::LogicalAnticommutesCheck(which) => {
                write!(f, "logical operator anticommutes with {which}")
            }
            CodeError::BadDistance(d) => {
                write!(f, "distance {d} is not an odd integer >= 3")
            }
        }
    }
}

impl core::error::Error for CodeError {}

impl CssCode {
    pub fn validate(&self) -> Result<(), CodeError> {
        for (xi, x) in self.x_checks.iter().enumerate() {
            for (zi, z) in self.z_checks.iter().enumerate() {
                if x.dot_parity(z) {
                    return Err(CodeError::NonCommutingChecks { x: xi, z: zi });
                }
            }
        }
        if !self.logical_x.dot_parity(&self.logical_z) {
            return Err(CodeError::LogicalsCommute);
        }
        for x in &self.x_checks {
            if x.dot_parity(&self.logical_z) {
                return Err(CodeError::LogicalAnticommutesCheck(String::from("an X check")));
            }
        }
        for z in &self.z_checks {
            if z.dot_parity(&self.logical_x) {
                return Err(CodeError::LogicalAnticommutesCheck(String::from("a Z check")));
            }
        }
        Ok(())
    }

    /// Number of encoded qubits.
    pub fn k(&self) -> usize {
        self.n_qubits - self.x_checks.len() - self.z_checks.len()
    }

    /// The view of this code relevant for decoding one error family.
    pub fn sector(&self, which: ErrorSector) -> SectorCode {
        match which {
            ErrorSector::XErrors => SectorCode {
                n_qubits: self.n_qubits,
                detectors: self.z_checks.clone(),
                group: self.x_checks.clone(),
                opposing_logical: self.logical_z.clone(),
                same_logical: self.logical_x.clone(),
                action: ErrorSector::XErrors,
            },
            ErrorSector::ZErrors => SectorCode {
                n_qubits: self.n_qubits,
                detectors: self.x_checks.clone(),
                group: self.z_checks.clone(),
                opposing_logical: self.logical_x.clone(),
                same_logical: self.logical_z.clone(),
                action: ErrorSector::ZErrors,
            },
        }
    }

    /// The six-qubit code used as the worked decoding example: Z-type checks
    /// Z1Z2Z4, Z2Z3Z5, Z4Z6, Z5Z6, X-type check X2X4X5X6, logicals
    /// X1X2X3 and Z1.
    pub fn six_qubit() -> Self {
        let code = CssCode {
            n_qubits: 6,
            x_checks: alloc::vec![Bits::from_indices(&[1, 3, 4, 5])],
            z_checks: alloc::vec![
                Bits::from_indices(&[0, 1, 3]),
                Bits::from_indices(&[1, 2, 4]),
                Bits::from_indices(&[3, 5]),
                Bits::from_indices(&[4, 5]),
            ],
            logical_x: Bits::from_indices(&[0, 1, 2]),
            logical_z: Bits::from_indices(&[0]),
        };
        debug_assert!(code.validate().is_ok());
        code
    }

    /// Rotated surface code of odd distance `d >= 3` with `d*d` data qubits.
    ///
    /// Data qubit `(r, c)` has index `r*d + c`. Check ancillas sit on the
    /// `(d+1) x (d+1)` dual grid; position `(i, j)` touches the up-to-four
    /// data qubits `(i-1..i, j-1..j)`, is X-type when `i+j` is even, and
    /// boundary checks survive only on the top/bottom rows (X) or the
    /// left/right columns (Z). Checks are numbered row-major per type.
    /// Logical X is the left column of qubits, logical Z the top row.
    pub fn rotated_surface(d: usize) -> Result<Self, CodeError> {
        if d < 3 || d % 2 == 0 {
            return Err(CodeError::BadDistance(d));
        }
        let mut x_checks = Vec::new();
        let mut z_checks = Vec::new();
        for i in 0..=d {
            for j in 0..=d {
                let mut qubits = Vec::new();
                for (r, c) in [(i, j), (i, j + 1), (i + 1, j), (i + 1, j + 1)] {
                    // ancilla (i, j) touches data (i-1..i, j-1..j); shift by one
                    // to stay in unsigned arithmetic
                    if (1..=d).contains(&r) && (1..=d).contains(&c) {
                        qubits.push((r - 1) * d + (c - 1));
                    }
                }
                if qubits.len() < 2 {
                    continue;
                }
                let is_x = (i + j) % 2 == 0;
                let interior = (1..d).contains(&i) && (1..d).contains(&j);
                let keep = interior
                    || (is_x && (i == 0 || i == d))
                    || (!is_x && (j == 0 || j == d));
                if !keep {
                    continue;
                }
                let row = Bits::from_indices(&qubits);
                if is_x {
                    x_checks.push(row);
                } else {
                    z_checks.push(row);
                }
            }
        }
        let code = CssCode {
            n_qubits: d * d,
            x_checks,
            z_checks,
            logical_x: (0..d).map(|r| r * d).collect(),
            logical_z: (0..d).collect(),
        };
        code.validate()?;
        Ok(code)
    }
}

/// A rotated surface code restricted to one error sector; carries the check
/// rows that become decoding-graph vertices and the logical vectors.
#[derive(Debug, Clone)]
pub struct SurfaceCodeLayout {
    pub distance: usize,
    pub sector: ErrorSector,
    pub code: SectorCode,
}

impl SurfaceCodeLayout {
    pub fn new(distance: usize, sector: ErrorSector) -> Result<Self, CodeError> {
        let css = CssCode::rotated_surface(distance)?;
        Ok(SurfaceCodeLayout {
            distance,
            sector,
            code: css.sector(sector),
        })
    }
}

/// One error family of a CSS code: the checks that detect it, the same-type
/// stabilizer group that folds its cosets, and the opposing logical operator
/// whose overlap parity names the logical class.
#[derive(Debug, Clone)]
pub struct SectorCode {
    pub n_qubits: usize,
    /// Checks anticommuting with this sector's errors; one graph vertex each.
    pub detectors: Vec<Bits>,
    /// Same-type stabilizer generators; errors in one coset differ by these.
    pub group: Vec<Bits>,
    /// Binary support of the opposing logical operator; its overlap parity
    /// names the class of an error.
    pub opposing_logical: Bits,
    /// Binary support of the same-type logical operator; adding it moves an
    /// error to the other class's coset.
    pub same_logical: Bits,
    pub action: ErrorSector,
}

impl SectorCode {
    /// Syndrome of a binary error vector under this sector's detectors.
    pub fn syndrome_of(&self, error: &Bits) -> Vec<u8> {
        self.detectors
            .iter()
            .map(|g| g.dot_parity(error) as u8)
            .collect()
    }

    /// Logical class of a binary error in this sector.
    pub fn class_of(&self, error: &Bits) -> ClassLabel {
        let bit = self.opposing_logical.dot_parity(error);
        ClassLabel::from_sector_bit(self.action, bit)
    }

    /// Logical class of an integer vector, by overlap parity with the
    /// opposing logical support.
    pub fn class_of_ints(&self, v: &[i64]) -> ClassLabel {
        let mut parity = false;
        for q in self.opposing_logical.iter_ones() {
            parity ^= v[q] & 1 == 1;
        }
        ClassLabel::from_sector_bit(self.action, parity)
    }
}

/// Logical class of an error on a one-logical-qubit code: whether it acts as
/// logical X and/or logical Z.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ClassLabel {
    pub x: bool,
    pub z: bool,
}

impl ClassLabel {
    pub const I: ClassLabel = ClassLabel { x: false, z: false };
    pub const X: ClassLabel = ClassLabel { x: true, z: false };
    pub const Z: ClassLabel = ClassLabel { x: false, z: true };
    pub const Y: ClassLabel = ClassLabel { x: true, z: true };

    pub fn from_sector_bit(sector: ErrorSector, bit: bool) -> Self {
        match sector {
            ErrorSector::XErrors => ClassLabel { x: bit, z: false },
            ErrorSector::ZErrors => ClassLabel { x: false, z: bit },
        }
    }

    pub fn combine(a: ClassLabel, b: ClassLabel) -> ClassLabel {
        ClassLabel {
            x: a.x ^ b.x,
            z: a.z ^ b.z,
        }
    }

    pub fn name(&self) -> &'static str {
        match (self.x, self.z) {
            (false, false) => "I",
            (true, false) => "X",
            (false, true) => "Z",
            (true, true) => "Y",
        }
    }

    fn rank(&self) -> u8 {
        match (self.x, self.z) {
            (false, false) => 0, // I
            (true, false) => 1,  // X
            (true, true) => 2,   // Y
            (false, true) => 3,  // Z
        }
    }
}

/// Order is lexicographic on the printed name (I < X < Y < Z), which is the
/// documented argmax tie-break after preferring the identity.
impl Ord for ClassLabel {
    fn cmp(&self, other: &Self) -> core::cmp::Ordering {
        self.rank().cmp(&other.rank())
    }
}

impl PartialOrd for ClassLabel {
    fn partial_cmp(&self, other: &Self) -> Option<core::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// An outer stabilizer code together with optional per-mode GKP shape
/// matrices; `shapes: None` means a plain qubit code.
#[derive(Debug, Clone)]
pub struct CodeSpec {
    pub css: CssCode,
    pub shapes: Option<Vec<crate::gkp::Mat2>>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_qubit_code_is_valid() {
        let code = CssCode::six_qubit();
        code.validate().unwrap();
        assert_eq!(code.k(), 1);
        let sector = code.sector(ErrorSector::XErrors);
        assert_eq!(sector.detectors.len(), 4);
        assert_eq!(sector.group.len(), 1);
    }

    #[test]
    fn rotated_surface_counts() {
        for (d, checks) in [(3, 4), (5, 12), (7, 24)] {
            let code = CssCode::rotated_surface(d).unwrap();
            assert_eq!(code.x_checks.len(), checks);
            assert_eq!(code.z_checks.len(), checks);
            assert_eq!(code.k(), 1);
        }
        assert!(CssCode::rotated_surface(1).is_err());
        assert!(CssCode::rotated_surface(4).is_err());
    }

    #[test]
    fn rotated_surface_is_graphlike() {
        let code = CssCode::rotated_surface(5).unwrap();
        for q in 0..code.n_qubits {
            let probe = Bits::from_indices(&[q]);
            let in_x = code.x_checks.iter().filter(|c| c.intersects(&probe)).count();
            let in_z = code.z_checks.iter().filter(|c| c.intersects(&probe)).count();
            assert!((1..=2).contains(&in_x));
            assert!((1..=2).contains(&in_z));
        }
    }

    #[test]
    fn class_label_ordering_is_lexicographic() {
        assert!(ClassLabel::I < ClassLabel::X);
        assert!(ClassLabel::X < ClassLabel::Y);
        assert!(ClassLabel::Y < ClassLabel::Z);
    }

    #[test]
    fn six_qubit_classes() {
        let sector = CssCode::six_qubit().sector(ErrorSector::XErrors);
        // X1X3 anticommutes with Z1
        assert_eq!(sector.class_of(&Bits::from_indices(&[0, 2])), ClassLabel::X);
        // X4X5X6 commutes with Z1
        assert_eq!(sector.class_of(&Bits::from_indices(&[3, 4, 5])), ClassLabel::I);
        assert_eq!(sector.class_of(&Bits::new()), ClassLabel::I);
    }
}
