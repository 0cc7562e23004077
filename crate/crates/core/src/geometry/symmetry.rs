use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use std::fmt;

use super::frame::JacobiFrame;
use super::sectors::{Sector, SectorKey, SectorTable};
use super::system::{MassSystem, Statistics};
use crate::error::Result;

/// Exchange of identical particles, optionally composed with parity.
///
/// Acts on particle coordinates as `(g q)_i = s · q_{perm[i]}` with `s = -1` under parity.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GroupElement {
    pub perm: Vec<usize>,
    pub parity: bool,
}

impl GroupElement {
    pub fn identity(n: usize) -> Self {
        Self { perm: (0..n).collect(), parity: false }
    }

    pub fn exchange(n: usize, i: usize, j: usize) -> Self {
        let mut perm: Vec<usize> = (0..n).collect();
        perm.swap(i, j);
        Self { perm, parity: false }
    }

    pub fn parity(n: usize) -> Self {
        Self { perm: (0..n).collect(), parity: true }
    }

    pub fn apply(&self, q: &[f64]) -> Vec<f64> {
        let s = if self.parity { -1.0 } else { 1.0 };
        self.perm.iter().map(|&k| s * q[k]).collect()
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Self) -> Self {
        // (a(b q))_i = s_a (b q)_{a_i} = s_a s_b q_{b[a_i]}
        let perm = self.perm.iter().map(|&k| other.perm[k]).collect();
        Self { perm, parity: self.parity ^ other.parity }
    }

    pub fn inverse(&self) -> Self {
        let mut perm = vec![0; self.perm.len()];
        for (i, &k) in self.perm.iter().enumerate() {
            perm[k] = i;
        }
        Self { perm, parity: self.parity }
    }

    pub fn is_identity(&self) -> bool {
        !self.parity && self.perm.iter().enumerate().all(|(i, &k)| i == k)
    }

    /// Cycle decomposition (1-based, cycles of length > 1).
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let n = self.perm.len();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for s in 0..n {
            if seen[s] {
                continue;
            }
            let mut c = Vec::new();
            let mut k = s;
            while !seen[k] {
                seen[k] = true;
                c.push(k + 1);
                k = self.perm[k];
            }
            if c.len() > 1 {
                out.push(c);
            }
        }
        out
    }

    /// Sign of the wavefunction under this element for the given statistics and parity.
    pub fn character(&self, sys: &MassSystem, parity_sign: f64) -> f64 {
        let mut chi = if self.parity { parity_sign } else { 1.0 };
        for c in self.cycles() {
            let st = sys.particles()[c[0] - 1].statistics;
            if st == Statistics::Fermion && c.len() % 2 == 0 {
                chi = -chi;
            }
        }
        chi
    }

    /// Matrix of the induced orthogonal map on relative coordinates.
    pub fn relative_matrix(&self, frame: &JacobiFrame) -> DMatrix<f64> {
        let n = frame.n();
        let mut g = DMatrix::zeros(n, n);
        let s = if self.parity { -1.0 } else { 1.0 };
        for (i, &k) in self.perm.iter().enumerate() {
            g[(i, k)] = s;
        }
        let full = frame.matrix() * g * frame.inverse();
        full.view((0, 0), (n - 1, n - 1)).into_owned()
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_identity() {
            return f.write_str("E");
        }
        if self.parity {
            f.write_str("P")?;
        }
        for c in self.cycles() {
            let digits: String = c.iter().map(|d| d.to_string()).collect();
            if c.len() == 2 {
                write!(f, "T{digits}")?;
            } else {
                write!(f, "C{digits}")?;
            }
        }
        Ok(())
    }
}

/// Intra-species exchanges times parity.
#[derive(Debug, Clone)]
pub struct SymmetryGroup {
    elements: Vec<GroupElement>,
}

impl SymmetryGroup {
    pub fn new(sys: &MassSystem) -> Self {
        let n = sys.len();
        let mut gens = Vec::new();
        for sp in sys.species() {
            let m = sys.members(sp);
            for w in m.windows(2) {
                gens.push(GroupElement::exchange(n, w[0], w[1]));
            }
        }
        gens.push(GroupElement::parity(n));
        let mut elements = vec![GroupElement::identity(n)];
        let mut frontier = 0;
        while frontier < elements.len() {
            let e = elements[frontier].clone();
            for g in &gens {
                let h = g.compose(&e);
                if !elements.contains(&h) {
                    elements.push(h);
                }
            }
            frontier += 1;
        }
        elements.sort_by_key(|e| (e.parity, e.cycles().len(), e.to_string()));
        Self { elements }
    }

    pub fn elements(&self) -> &[GroupElement] {
        &self.elements
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn image(&self, g: &GroupElement, sector: &Sector, table: &SectorTable) -> SectorKey {
        table.key_of(&g.apply(&sector.interior_point()))
    }

    /// Elements mapping the sector onto itself.
    pub fn stabilizer(&self, sector: &Sector, table: &SectorTable) -> Vec<GroupElement> {
        self.elements
            .iter()
            .filter(|g| self.image(g, sector, table) == sector.key)
            .cloned()
            .collect()
    }

    /// One element per image sector, `g` with `g · sector = image`.
    pub fn orbit(&self, sector: &Sector, table: &SectorTable) -> Vec<(SectorKey, GroupElement)> {
        let mut out: Vec<(SectorKey, GroupElement)> = Vec::new();
        for g in &self.elements {
            let k = self.image(g, sector, table);
            if !out.iter().any(|(key, _)| *key == k) {
                out.push((k, g.clone()));
            }
        }
        out
    }

    /// Checks that a character assignment on the stabilizer is a homomorphism.
    pub fn consistent_on(&self, sub: &[GroupElement], chi: impl Fn(&GroupElement) -> f64) -> Result<bool> {
        for a in sub {
            for b in sub {
                let ab = a.compose(b);
                if (chi(&ab) - chi(a) * chi(b)).abs() > 1e-12 {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(v: &[GroupElement]) -> Vec<String> {
        let mut n: Vec<String> = v.iter().map(|e| e.to_string()).collect();
        n.sort();
        n
    }

    #[test]
    fn two_plus_two_stabilizers() {
        let s = MassSystem::two_plus_two(2.0, Statistics::Boson, Statistics::Fermion).unwrap();
        let t = SectorTable::new(&s).unwrap();
        let g = SymmetryGroup::new(&s);
        assert_eq!(g.order(), 8);
        let st = |w: &str| names(&g.stabilizer(&t.find_by_word(w).unwrap(), &t));
        assert_eq!(st("AABB"), vec!["E", "T12", "T12T34", "T34"]);
        assert_eq!(st("ABBA"), vec!["E", "PT12", "PT12T34", "T34"]);
        assert_eq!(st("BAAB"), vec!["E", "PT12T34", "PT34", "T12"]);
        assert_eq!(st("ABAB"), vec!["E"]);
        assert_eq!(g.orbit(&t.find_by_word("ABAB").unwrap(), &t).len(), 8);
    }

    #[test]
    fn three_plus_one_stabilizer() {
        let s = MassSystem::three_plus_one(1.0, Statistics::Fermion).unwrap();
        let t = SectorTable::new(&s).unwrap();
        let g = SymmetryGroup::new(&s);
        assert_eq!(g.order(), 12);
        let sec = t.find_by_word("AABA").unwrap();
        assert_eq!(sec.label(), "AABA/1243");
        assert_eq!(names(&g.stabilizer(&sec, &t)), vec!["E", "T12"]);
    }

    #[test]
    fn characters_and_relative_orthogonality() {
        let s = MassSystem::two_plus_two(3.0, Statistics::Boson, Statistics::Fermion).unwrap();
        let f = JacobiFrame::new(&s).unwrap();
        let g = SymmetryGroup::new(&s);
        for e in g.elements() {
            let m = e.relative_matrix(&f);
            let err = (&m * m.transpose() - DMatrix::identity(3, 3)).abs().max();
            assert!(err < 1e-12);
        }
        let t34 = GroupElement::exchange(4, 2, 3);
        assert_eq!(t34.character(&s, 1.0), -1.0);
        assert_eq!(GroupElement::exchange(4, 0, 1).character(&s, 1.0), 1.0);
        let pt34 = GroupElement::parity(4).compose(&t34);
        assert_eq!(pt34.character(&s, 1.0), -1.0);
        assert_eq!(pt34.character(&s, -1.0), 1.0);
        // T12 flips x only
        let m = GroupElement::exchange(4, 0, 1).relative_matrix(&f);
        assert!((m[(0, 0)] + 1.0).abs() < 1e-12 && (m[(1, 1)] - 1.0).abs() < 1e-12 && (m[(2, 2)] - 1.0).abs() < 1e-12);
    }
}
