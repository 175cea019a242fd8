use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::damping::BasisTag;

/// Occupation counts `(n₁, n₂, n₃, n₄)` of the four single-spin
/// eigenoperators across the periphery.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DampingClass {
    pub counts: [usize; 4],
}

impl DampingClass {
    pub fn new(counts: [usize; 4]) -> Self {
        Self { counts }
    }

    pub fn n_spins(&self) -> usize {
        self.counts.iter().sum()
    }

    pub fn count(&self, tag: BasisTag) -> usize {
        self.counts[tag.index()]
    }

    /// Number of site assignments in the class, `N!/(n₁!n₂!n₃!n₄!)`.
    pub fn multiplicity(&self) -> f64 {
        let [a, b, c, _] = self.counts;
        let n = self.n_spins();
        binomial(n, a) * binomial(n - a, b) * binomial(n - a - b, c)
    }

    /// Net `σ⁺` minus `σ⁻` count.
    pub fn charge(&self) -> i64 {
        self.counts[2] as i64 - self.counts[3] as i64
    }

    /// Populated at t = 0 when the periphery starts in its ground state.
    pub fn is_initial(&self) -> bool {
        self.counts[2] == 0 && self.counts[3] == 0
    }

    /// `κ − e_from + e_to`, if `κ` has a site carrying `from`.
    pub fn moved(&self, from: usize, to: usize) -> Option<Self> {
        if self.counts[from] == 0 {
            return None;
        }
        let mut c = self.counts;
        c[from] -= 1;
        c[to] += 1;
        Some(Self { counts: c })
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// All classes for `n_spins` sites in lexicographic order of their counts.
pub fn enumerate_classes(n_spins: usize) -> Vec<DampingClass> {
    let mut out = Vec::with_capacity(class_count(n_spins));
    for a in 0..=n_spins {
        for b in 0..=n_spins - a {
            for c in 0..=n_spins - a - b {
                out.push(DampingClass::new([a, b, c, n_spins - a - b - c]));
            }
        }
    }
    out
}

/// `C(N+3, 3)`.
pub fn class_count(n_spins: usize) -> usize {
    (n_spins + 1) * (n_spins + 2) * (n_spins + 3) / 6
}

/// Class list with reverse lookup.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassIndex {
    classes: Vec<DampingClass>,
    lookup: BTreeMap<[usize; 4], usize>,
}

impl ClassIndex {
    pub fn new(n_spins: usize) -> Self {
        let classes = enumerate_classes(n_spins);
        let lookup = classes.iter().enumerate().map(|(i, c)| (c.counts, i)).collect();
        Self { classes, lookup }
    }

    pub fn classes(&self) -> &[DampingClass] {
        &self.classes
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn position(&self, class: &DampingClass) -> Option<usize> {
        self.lookup.get(&class.counts).copied()
    }

    /// Index of the all-`μ¹` class, the only one with unit peripheral trace.
    pub fn stationary(&self) -> usize {
        self.classes.len() - 1
    }
}
