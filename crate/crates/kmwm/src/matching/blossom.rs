//! Maximum-weight general matching (Galil/Edmonds blossom method, after the
//! well-known van Rantwijk implementation), adapted to f64 weights, plus a
//! minimum-weight perfect matching wrapper.
//!
//! Slack tests use a small absolute tolerance; dual updates are sums and
//! differences of input weights, so accumulated error stays far below the
//! weight gaps this crate cares about.

use alloc::vec;
use alloc::vec::Vec;

const SENTINEL: usize = usize::MAX;
const EPS: f64 = 1e-10;

/// Minimum-weight perfect matching on an even-order graph with nonnegative
/// weights. Returns `mate` with `mate[v]` the partner of `v`, or `None` if no
/// perfect matching exists.
pub fn min_weight_perfect_matching(
    n: usize,
    edges: &[(usize, usize, f64)],
) -> Option<Vec<usize>> {
    if n == 0 {
        return Some(Vec::new());
    }
    if n % 2 == 1 {
        return None;
    }
    let wmax = edges.iter().fold(0.0f64, |m, e| m.max(e.2));
    // maximize sum of (wmax - w) at maximum cardinality = minimize sum of w
    // over perfect matchings
    let flipped: Vec<(usize, usize, f64)> =
        edges.iter().map(|&(i, j, w)| (i, j, wmax - w)).collect();
    let mate = MaxWeightMatching::new(n, &flipped, true).solve();
    if mate.iter().take(n).any(|&m| m == SENTINEL) {
        return None;
    }
    Some(mate)
}

struct MaxWeightMatching {
    nvertex: usize,
    nedge: usize,
    edges: Vec<(usize, usize, f64)>,
    maxcardinality: bool,
    endpoint: Vec<usize>,
    neighbend: Vec<Vec<usize>>,
    mate: Vec<usize>,
    label: Vec<u8>,
    labelend: Vec<usize>,
    inblossom: Vec<usize>,
    blossomparent: Vec<usize>,
    blossomchilds: Vec<Vec<usize>>,
    blossombase: Vec<usize>,
    blossomendps: Vec<Vec<usize>>,
    bestedge: Vec<usize>,
    blossombestedges: Vec<Vec<usize>>,
    unusedblossoms: Vec<usize>,
    dualvar: Vec<f64>,
    allowedge: Vec<bool>,
    queue: Vec<usize>,
}

impl MaxWeightMatching {
    fn new(nvertex: usize, edges: &[(usize, usize, f64)], maxcardinality: bool) -> Self {
        let nedge = edges.len();
        let maxweight = edges.iter().fold(0.0f64, |m, e| m.max(e.2));
        let endpoint = (0..2 * nedge)
            .map(|p| if p % 2 == 0 { edges[p / 2].0 } else { edges[p / 2].1 })
            .collect();
        let mut neighbend = vec![Vec::new(); nvertex];
        for (k, &(i, j, _)) in edges.iter().enumerate() {
            neighbend[i].push(2 * k + 1);
            neighbend[j].push(2 * k);
        }
        let mut dualvar = vec![maxweight; nvertex];
        dualvar.extend(vec![0.0; nvertex]);
        let mut blossombase: Vec<usize> = (0..nvertex).collect();
        blossombase.extend(vec![SENTINEL; nvertex]);
        MaxWeightMatching {
            nvertex,
            nedge,
            edges: edges.to_vec(),
            maxcardinality,
            endpoint,
            neighbend,
            mate: vec![SENTINEL; nvertex],
            label: vec![0; 2 * nvertex],
            labelend: vec![SENTINEL; 2 * nvertex],
            inblossom: (0..nvertex).collect(),
            blossomparent: vec![SENTINEL; 2 * nvertex],
            blossomchilds: vec![Vec::new(); 2 * nvertex],
            blossombase,
            blossomendps: vec![Vec::new(); 2 * nvertex],
            bestedge: vec![SENTINEL; 2 * nvertex],
            blossombestedges: vec![Vec::new(); 2 * nvertex],
            unusedblossoms: (nvertex..2 * nvertex).collect(),
            dualvar,
            allowedge: vec![false; nedge],
            queue: Vec::new(),
        }
    }

    fn slack(&self, k: usize) -> f64 {
        let (i, j, wt) = self.edges[k];
        self.dualvar[i] + self.dualvar[j] - 2.0 * wt
    }

    fn blossom_leaves(&self, b: usize, out: &mut Vec<usize>) {
        if b < self.nvertex {
            out.push(b);
        } else {
            for &t in &self.blossomchilds[b] {
                if t < self.nvertex {
                    out.push(t);
                } else {
                    self.blossom_leaves(t, out);
                }
            }
        }
    }

    fn assign_label(&mut self, w: usize, t: u8, p: usize) {
        let b = self.inblossom[w];
        debug_assert!(self.label[w] == 0 && self.label[b] == 0);
        self.label[w] = t;
        self.label[b] = t;
        self.labelend[w] = p;
        self.labelend[b] = p;
        self.bestedge[w] = SENTINEL;
        self.bestedge[b] = SENTINEL;
        if t == 1 {
            let mut leaves = Vec::new();
            self.blossom_leaves(b, &mut leaves);
            self.queue.extend(leaves);
        } else if t == 2 {
            let base = self.blossombase[b];
            debug_assert!(self.mate[base] != SENTINEL);
            let mbase = self.mate[base];
            let ep = self.endpoint[mbase];
            self.assign_label(ep, 1, mbase ^ 1);
        }
    }

    fn scan_blossom(&mut self, v: usize, w: usize) -> usize {
        let mut path = Vec::new();
        let mut base = SENTINEL;
        let mut v = v;
        let mut w = w;
        while v != SENTINEL || w != SENTINEL {
            let mut b = self.inblossom[v];
            if self.label[b] & 4 != 0 {
                base = self.blossombase[b];
                break;
            }
            debug_assert!(self.label[b] == 1);
            path.push(b);
            self.label[b] = 5;
            debug_assert!(self.labelend[b] == self.mate[self.blossombase[b]]);
            if self.labelend[b] == SENTINEL {
                v = SENTINEL;
            } else {
                v = self.endpoint[self.labelend[b]];
                b = self.inblossom[v];
                debug_assert!(self.label[b] == 2);
                debug_assert!(self.labelend[b] != SENTINEL);
                v = self.endpoint[self.labelend[b]];
            }
            if w != SENTINEL {
                core::mem::swap(&mut v, &mut w);
            }
        }
        for b in path {
            self.label[b] = 1;
        }
        base
    }

    fn add_blossom(&mut self, base: usize, k: usize) {
        let (mut v, mut w, _) = self.edges[k];
        let bb = self.inblossom[base];
        let mut bv = self.inblossom[v];
        let mut bw = self.inblossom[w];
        let b = self.unusedblossoms.pop().expect("blossom pool exhausted");
        self.blossombase[b] = base;
        self.blossomparent[b] = SENTINEL;
        self.blossomparent[bb] = b;
        let mut childs = Vec::new();
        let mut endps = Vec::new();
        while bv != bb {
            self.blossomparent[bv] = b;
            childs.push(bv);
            endps.push(self.labelend[bv]);
            debug_assert!(self.labelend[bv] != SENTINEL);
            v = self.endpoint[self.labelend[bv]];
            bv = self.inblossom[v];
        }
        childs.push(bb);
        childs.reverse();
        endps.reverse();
        endps.push(2 * k);
        while bw != bb {
            self.blossomparent[bw] = b;
            childs.push(bw);
            endps.push(self.labelend[bw] ^ 1);
            debug_assert!(self.labelend[bw] != SENTINEL);
            w = self.endpoint[self.labelend[bw]];
            bw = self.inblossom[w];
        }
        debug_assert!(self.label[bb] == 1);
        self.label[b] = 1;
        self.labelend[b] = self.labelend[bb];
        self.dualvar[b] = 0.0;
        self.blossomchilds[b] = childs;
        self.blossomendps[b] = endps;
        let mut leaves = Vec::new();
        self.blossom_leaves(b, &mut leaves);
        for &lv in &leaves {
            if self.label[self.inblossom[lv]] == 2 {
                self.queue.push(lv);
            }
            self.inblossom[lv] = b;
        }
        // compute least-slack edges to neighbouring S-blossoms
        let mut bestedgeto = vec![SENTINEL; 2 * self.nvertex];
        let childs = self.blossomchilds[b].clone();
        for bv in childs {
            let nblists: Vec<Vec<usize>> = if self.blossombestedges[bv].is_empty() {
                let mut lists = Vec::new();
                let mut lvs = Vec::new();
                self.blossom_leaves(bv, &mut lvs);
                for lv in lvs {
                    lists.push(self.neighbend[lv].iter().map(|p| p / 2).collect());
                }
                lists
            } else {
                vec![self.blossombestedges[bv].clone()]
            };
            for nblist in nblists {
                for k in nblist {
                    let (i, mut j, _) = self.edges[k];
                    if self.inblossom[j] == b {
                        j = i;
                    }
                    let bj = self.inblossom[j];
                    if bj != b
                        && self.label[bj] == 1
                        && (bestedgeto[bj] == SENTINEL
                            || self.slack(k) < self.slack(bestedgeto[bj]))
                    {
                        bestedgeto[bj] = k;
                    }
                }
            }
            self.blossombestedges[bv] = Vec::new();
            self.bestedge[bv] = SENTINEL;
        }
        self.blossombestedges[b] = bestedgeto
            .into_iter()
            .filter(|&k| k != SENTINEL)
            .collect();
        self.bestedge[b] = SENTINEL;
        for idx in 0..self.blossombestedges[b].len() {
            let k = self.blossombestedges[b][idx];
            if self.bestedge[b] == SENTINEL || self.slack(k) < self.slack(self.bestedge[b]) {
                self.bestedge[b] = k;
            }
        }
    }

    fn expand_blossom(&mut self, b: usize, endstage: bool) {
        for s in self.blossomchilds[b].clone() {
            self.blossomparent[s] = SENTINEL;
            if s < self.nvertex {
                self.inblossom[s] = s;
            } else if endstage && self.dualvar[s].abs() <= EPS {
                self.expand_blossom(s, endstage);
            } else {
                let mut lvs = Vec::new();
                self.blossom_leaves(s, &mut lvs);
                for v in lvs {
                    self.inblossom[v] = s;
                }
            }
        }
        if !endstage && self.label[b] == 2 {
            debug_assert!(self.labelend[b] != SENTINEL);
            let entrychild = self.inblossom[self.endpoint[self.labelend[b] ^ 1]];
            let len = self.blossomchilds[b].len() as i64;
            let mut j = self.blossomchilds[b]
                .iter()
                .position(|&r| r == entrychild)
                .unwrap() as i64;
            let (jstep, endptrick): (i64, usize) = if j & 1 != 0 {
                j -= len;
                (1, 0)
            } else {
                (-1, 1)
            };
            let idx = |list: &Vec<usize>, i: i64| -> usize {
                if i >= 0 {
                    list[i as usize]
                } else {
                    list[(list.len() as i64 + i) as usize]
                }
            };
            let mut p = self.labelend[b];
            while j != 0 {
                self.label[self.endpoint[p ^ 1]] = 0;
                let q = idx(&self.blossomendps[b], j - endptrick as i64) ^ endptrick ^ 1;
                self.label[self.endpoint[q]] = 0;
                let ep = self.endpoint[p ^ 1];
                self.assign_label(ep, 2, p);
                self.allowedge[idx(&self.blossomendps[b], j - endptrick as i64) / 2] = true;
                j += jstep;
                p = idx(&self.blossomendps[b], j - endptrick as i64) ^ endptrick;
                self.allowedge[p / 2] = true;
                j += jstep;
            }
            let bv = idx(&self.blossomchilds[b], j);
            self.label[self.endpoint[p ^ 1]] = 2;
            self.label[bv] = 2;
            self.labelend[self.endpoint[p ^ 1]] = p;
            self.labelend[bv] = p;
            self.bestedge[bv] = SENTINEL;
            j += jstep;
            while idx(&self.blossomchilds[b], j) != entrychild {
                let bv = idx(&self.blossomchilds[b], j);
                if self.label[bv] == 1 {
                    j += jstep;
                    continue;
                }
                let mut lvs = Vec::new();
                self.blossom_leaves(bv, &mut lvs);
                let mut v = SENTINEL;
                for lv in lvs {
                    v = lv;
                    if self.label[lv] != 0 {
                        break;
                    }
                }
                if v != SENTINEL && self.label[v] != 0 {
                    debug_assert!(self.label[v] == 2);
                    debug_assert!(self.inblossom[v] == bv);
                    self.label[v] = 0;
                    self.label[self.endpoint[self.mate[self.blossombase[bv]]]] = 0;
                    let lblend = self.labelend[v];
                    self.assign_label(v, 2, lblend);
                }
                j += jstep;
            }
        }
        self.label[b] = 0;
        self.labelend[b] = SENTINEL;
        self.blossombase[b] = SENTINEL;
        self.bestedge[b] = SENTINEL;
        self.blossomchilds[b] = Vec::new();
        self.blossomendps[b] = Vec::new();
        self.blossombestedges[b] = Vec::new();
        self.unusedblossoms.push(b);
    }

    fn augment_blossom(&mut self, b: usize, v: usize) {
        let mut t = v;
        while self.blossomparent[t] != b {
            t = self.blossomparent[t];
        }
        if t >= self.nvertex {
            self.augment_blossom(t, v);
        }
        let i = self.blossomchilds[b].iter().position(|&r| r == t).unwrap();
        let len = self.blossomchilds[b].len() as i64;
        let mut j = i as i64;
        let (jstep, endptrick): (i64, usize) = if i & 1 != 0 {
            j -= len;
            (1, 0)
        } else {
            (-1, 1)
        };
        let idx = |list: &Vec<usize>, i: i64| -> usize {
            if i >= 0 {
                list[i as usize]
            } else {
                list[(list.len() as i64 + i) as usize]
            }
        };
        while j != 0 {
            j += jstep;
            let mut t = idx(&self.blossomchilds[b], j);
            let p = idx(&self.blossomendps[b], j - endptrick as i64) ^ endptrick;
            if t >= self.nvertex {
                self.augment_blossom(t, self.endpoint[p]);
            }
            j += jstep;
            t = idx(&self.blossomchilds[b], j);
            if t >= self.nvertex {
                self.augment_blossom(t, self.endpoint[p ^ 1]);
            }
            self.mate[self.endpoint[p]] = p ^ 1;
            self.mate[self.endpoint[p ^ 1]] = p;
        }
        self.blossomchilds[b].rotate_left(i);
        self.blossomendps[b].rotate_left(i);
        self.blossombase[b] = self.blossombase[self.blossomchilds[b][0]];
        debug_assert!(self.blossombase[b] == v);
    }

    fn augment_matching(&mut self, k: usize) {
        let (v, w, _) = self.edges[k];
        for (mut s, mut p) in [(v, 2 * k + 1), (w, 2 * k)] {
            loop {
                let bs = self.inblossom[s];
                debug_assert!(self.label[bs] == 1);
                debug_assert!(self.labelend[bs] == self.mate[self.blossombase[bs]]);
                if bs >= self.nvertex {
                    self.augment_blossom(bs, s);
                }
                self.mate[s] = p;
                if self.labelend[bs] == SENTINEL {
                    break;
                }
                let t = self.endpoint[self.labelend[bs]];
                let bt = self.inblossom[t];
                debug_assert!(self.label[bt] == 2);
                debug_assert!(self.labelend[bt] != SENTINEL);
                s = self.endpoint[self.labelend[bt]];
                let j = self.endpoint[self.labelend[bt] ^ 1];
                debug_assert!(self.blossombase[bt] == t);
                if bt >= self.nvertex {
                    self.augment_blossom(bt, j);
                }
                self.mate[j] = self.labelend[bt];
                p = self.labelend[bt] ^ 1;
            }
        }
    }

    fn solve(&mut self) -> Vec<usize> {
        if self.nedge == 0 {
            return self.mate.clone();
        }
        for _ in 0..self.nvertex {
            self.label = vec![0; 2 * self.nvertex];
            self.bestedge = vec![SENTINEL; 2 * self.nvertex];
            for b in self.nvertex..2 * self.nvertex {
                self.blossombestedges[b] = Vec::new();
            }
            self.allowedge = vec![false; self.nedge];
            self.queue = Vec::new();
            for v in 0..self.nvertex {
                if self.mate[v] == SENTINEL && self.label[self.inblossom[v]] == 0 {
                    self.assign_label(v, 1, SENTINEL);
                }
            }
            let mut augmented = false;
            loop {
                while !self.queue.is_empty() && !augmented {
                    let v = self.queue.pop().unwrap();
                    debug_assert!(self.label[self.inblossom[v]] == 1);
                    let mut kslack = 0.0;
                    for p in self.neighbend[v].clone() {
                        let k = p / 2;
                        let w = self.endpoint[p];
                        if self.inblossom[v] == self.inblossom[w] {
                            continue;
                        }
                        if !self.allowedge[k] {
                            kslack = self.slack(k);
                            if kslack <= EPS {
                                self.allowedge[k] = true;
                            }
                        }
                        if self.allowedge[k] {
                            if self.label[self.inblossom[w]] == 0 {
                                self.assign_label(w, 2, p ^ 1);
                            } else if self.label[self.inblossom[w]] == 1 {
                                let base = self.scan_blossom(v, w);
                                if base != SENTINEL {
                                    self.add_blossom(base, k);
                                } else {
                                    self.augment_matching(k);
                                    augmented = true;
                                    break;
                                }
                            } else if self.label[w] == 0 {
                                debug_assert!(self.label[self.inblossom[w]] == 2);
                                self.label[w] = 2;
                                self.labelend[w] = p ^ 1;
                            }
                        } else if self.label[self.inblossom[w]] == 1 {
                            let b = self.inblossom[v];
                            if self.bestedge[b] == SENTINEL
                                || kslack < self.slack(self.bestedge[b])
                            {
                                self.bestedge[b] = k;
                            }
                        } else if self.label[w] == 0
                            && (self.bestedge[w] == SENTINEL
                                || kslack < self.slack(self.bestedge[w]))
                        {
                            self.bestedge[w] = k;
                        }
                    }
                }
                if augmented {
                    break;
                }
                let mut deltatype = -1;
                let mut delta = 0.0f64;
                let mut deltaedge = 0usize;
                let mut deltablossom = 0usize;
                if !self.maxcardinality {
                    deltatype = 1;
                    delta = self.dualvar[..self.nvertex]
                        .iter()
                        .fold(f64::INFINITY, |m, &d| m.min(d));
                }
                for v in 0..self.nvertex {
                    if self.label[self.inblossom[v]] == 0 && self.bestedge[v] != SENTINEL {
                        let d = self.slack(self.bestedge[v]);
                        if deltatype == -1 || d < delta {
                            delta = d;
                            deltatype = 2;
                            deltaedge = self.bestedge[v];
                        }
                    }
                }
                for b in 0..2 * self.nvertex {
                    if self.blossomparent[b] == SENTINEL
                        && self.label[b] == 1
                        && self.bestedge[b] != SENTINEL
                    {
                        let d = self.slack(self.bestedge[b]) / 2.0;
                        if deltatype == -1 || d < delta {
                            delta = d;
                            deltatype = 3;
                            deltaedge = self.bestedge[b];
                        }
                    }
                }
                for b in self.nvertex..2 * self.nvertex {
                    if self.blossombase[b] != SENTINEL
                        && self.blossomparent[b] == SENTINEL
                        && self.label[b] == 2
                        && (deltatype == -1 || self.dualvar[b] < delta)
                    {
                        delta = self.dualvar[b];
                        deltatype = 4;
                        deltablossom = b;
                    }
                }
                if deltatype == -1 {
                    debug_assert!(self.maxcardinality);
                    deltatype = 1;
                    delta = self.dualvar[..self.nvertex]
                        .iter()
                        .fold(f64::INFINITY, |m, &d| m.min(d))
                        .max(0.0);
                }
                for v in 0..self.nvertex {
                    match self.label[self.inblossom[v]] {
                        0 => {}
                        1 => self.dualvar[v] -= delta,
                        2 => self.dualvar[v] += delta,
                        _ => unreachable!(),
                    }
                }
                for b in self.nvertex..2 * self.nvertex {
                    if self.blossombase[b] != SENTINEL && self.blossomparent[b] == SENTINEL {
                        match self.label[b] {
                            0 => {}
                            1 => self.dualvar[b] += delta,
                            2 => self.dualvar[b] -= delta,
                            _ => unreachable!(),
                        }
                    }
                }
                match deltatype {
                    1 => break,
                    2 => {
                        let (mut i, j, _) = self.edges[deltaedge];
                        self.allowedge[deltaedge] = true;
                        if self.label[self.inblossom[i]] == 0 {
                            i = j;
                        }
                        debug_assert!(self.label[self.inblossom[i]] == 1);
                        self.queue.push(i);
                    }
                    3 => {
                        self.allowedge[deltaedge] = true;
                        let (i, _, _) = self.edges[deltaedge];
                        debug_assert!(self.label[self.inblossom[i]] == 1);
                        self.queue.push(i);
                    }
                    4 => self.expand_blossom(deltablossom, false),
                    _ => unreachable!(),
                }
            }
            if !augmented {
                break;
            }
            for b in self.nvertex..2 * self.nvertex {
                if self.blossomparent[b] == SENTINEL
                    && self.blossombase[b] != SENTINEL
                    && self.label[b] == 1
                    && self.dualvar[b].abs() <= EPS
                {
                    self.expand_blossom(b, true);
                }
            }
        }
        let mut mate = self.mate.clone();
        for v in 0..self.nvertex {
            if mate[v] != SENTINEL {
                mate[v] = self.endpoint[mate[v]];
            }
        }
        for v in 0..self.nvertex {
            debug_assert!(mate[v] == SENTINEL || mate[mate[v]] == v);
        }
        mate
    }
}
