use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::fmt;

use super::frame::JacobiFrame;
use super::planes::{norm, BoundaryPlaneSet, PlaneKind};
use super::system::{Coupling, MassSystem};
use crate::error::{Error, Result};

/// Default distance (on the unit sphere of relative space) below which a point counts as on a plane.
pub const PLANE_TOLERANCE: f64 = 1e-9;

/// Identifies an ordering sector by the signs of `q_i - q_j` over the hard-wall pairs.
///
/// Orderings that differ only by swaps across transparent planes share a key.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SectorKey(pub u128);

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sector {
    pub key: SectorKey,
    /// Lexicographically smallest particle ordering (0-based, left to right) in the sector.
    pub representative: Vec<usize>,
    pub word: String,
}

impl Sector {
    /// `word/ordering`, e.g. `ABBA/1342`, with 1-based particle indices.
    pub fn label(&self) -> String {
        let digits: String = self
            .representative
            .iter()
            .map(|&i| char::from_digit((i + 1) as u32, 36).unwrap_or('?'))
            .collect();
        format!("{}/{}", self.word, digits)
    }

    /// A point strictly inside the sector (particles evenly spaced in representative order).
    pub fn interior_point(&self) -> Vec<f64> {
        let n = self.representative.len();
        let mut q = vec![0.0; n];
        for (rank, &i) in self.representative.iter().enumerate() {
            q[i] = rank as f64 - 0.5 * (n as f64 - 1.0);
        }
        q
    }
}

impl fmt::Display for Sector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// Classification of a single relative-space point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Classified {
    pub ordering: Vec<usize>,
    pub word: String,
    pub key: SectorKey,
}

/// Maps particle configurations to sectors of a given mass system.
#[derive(Debug, Clone)]
pub struct SectorTable {
    n: usize,
    species: Vec<char>,
    hard_pairs: Vec<(usize, usize)>,
    /// bit index of each hard pair, `None` for transparent pairs
    bit: Vec<Vec<Option<u32>>>,
}

impl SectorTable {
    pub fn new(sys: &MassSystem) -> Result<Self> {
        let n = sys.len();
        let mut hard_pairs = Vec::new();
        let mut bit = vec![vec![None; n]; n];
        for i in 0..n {
            for j in (i + 1)..n {
                if sys.coupling(i, j) == Coupling::Infinite {
                    if hard_pairs.len() >= 128 {
                        return Err(Error::InvalidSystem("more than 128 hard-wall pairs".into()));
                    }
                    bit[i][j] = Some(hard_pairs.len() as u32);
                    bit[j][i] = bit[i][j];
                    hard_pairs.push((i, j));
                }
            }
        }
        let species = sys.particles().iter().map(|p| p.species).collect();
        Ok(Self { n, species, hard_pairs, bit })
    }

    pub fn len_particles(&self) -> usize {
        self.n
    }

    pub fn hard_pairs(&self) -> &[(usize, usize)] {
        &self.hard_pairs
    }

    pub fn is_hard(&self, i: usize, j: usize) -> bool {
        self.bit[i][j].is_some()
    }

    /// Key of a particle configuration; ties on hard pairs resolve as `q_i < q_j` false.
    pub fn key_of(&self, q: &[f64]) -> SectorKey {
        let mut k = 0u128;
        for (b, &(i, j)) in self.hard_pairs.iter().enumerate() {
            if q[i] < q[j] {
                k |= 1u128 << b;
            }
        }
        SectorKey(k)
    }

    pub fn key_of_ordering(&self, ordering: &[usize]) -> SectorKey {
        let mut pos = vec![0usize; self.n];
        for (r, &i) in ordering.iter().enumerate() {
            pos[i] = r;
        }
        let mut k = 0u128;
        for (b, &(i, j)) in self.hard_pairs.iter().enumerate() {
            if pos[i] < pos[j] {
                k |= 1u128 << b;
            }
        }
        SectorKey(k)
    }

    /// Whether particle `i` is constrained to lie left of `j` in this sector.
    pub fn precedes(&self, key: SectorKey, i: usize, j: usize) -> Option<bool> {
        let b = self.bit[i][j]?;
        let lt = key.0 >> b & 1 == 1;
        Some(if i < j { lt } else { !lt })
    }

    /// Rebuilds the sector description from its key (smallest linear extension of the partial order).
    pub fn describe(&self, key: SectorKey) -> Result<Sector> {
        let n = self.n;
        let mut indeg = vec![0usize; n];
        let mut succ = vec![Vec::new(); n];
        for &(i, j) in &self.hard_pairs {
            let (a, b) = if self.precedes(key, i, j) == Some(true) { (i, j) } else { (j, i) };
            succ[a].push(b);
            indeg[b] += 1;
        }
        let mut placed = vec![false; n];
        let mut order = Vec::with_capacity(n);
        for _ in 0..n {
            let next = (0..n)
                .find(|&i| !placed[i] && indeg[i] == 0)
                .ok_or_else(|| Error::InvalidSystem("inconsistent sector key".into()))?;
            placed[next] = true;
            for &s in &succ[next] {
                indeg[s] -= 1;
            }
            order.push(next);
        }
        let word = order.iter().map(|&i| self.species[i]).collect();
        Ok(Sector { key, representative: order, word })
    }

    /// Every sector, found by enumerating orderings (limited to `N <= 9`).
    pub fn enumerate(&self) -> Result<Vec<Sector>> {
        if self.n > 9 {
            return Err(Error::InvalidSystem("sector enumeration limited to N <= 9".into()));
        }
        let mut seen: HashMap<SectorKey, ()> = HashMap::new();
        let mut out = Vec::new();
        let mut perm: Vec<usize> = (0..self.n).collect();
        let mut visit = |p: &[usize]| {
            let key = self.key_of_ordering(p);
            if seen.insert(key, ()).is_none() {
                out.push(key);
            }
        };
        permutations(&mut perm, 0, &mut visit);
        let mut sectors = out.into_iter().map(|k| self.describe(k)).collect::<Result<Vec<_>>>()?;
        sectors.sort_by(|a, b| a.representative.cmp(&b.representative));
        Ok(sectors)
    }

    /// First sector (in representative order) whose species word matches.
    pub fn find_by_word(&self, word: &str) -> Result<Sector> {
        if let Some((w, digits)) = word.split_once('/') {
            let ordering = digits
                .chars()
                .map(|c| c.to_digit(36).map(|d| d as usize - 1))
                .collect::<Option<Vec<_>>>()
                .filter(|o| o.len() == self.n)
                .ok_or_else(|| Error::Config(format!("bad sector label '{word}'")))?;
            let s = self.describe(self.key_of_ordering(&ordering))?;
            if s.word != w {
                return Err(Error::Config(format!("sector label '{word}' does not match word {}", s.word)));
            }
            return Ok(s);
        }
        self.enumerate()?
            .into_iter()
            .find(|s| s.word == word)
            .ok_or_else(|| Error::Config(format!("no sector with word '{word}'")))
    }
}

fn permutations(p: &mut Vec<usize>, k: usize, f: &mut impl FnMut(&[usize])) {
    if k == p.len() {
        f(p);
        return;
    }
    for i in k..p.len() {
        p.swap(k, i);
        permutations(p, k + 1, f);
        p.swap(k, i);
    }
}

/// Sorts the reconstructed particle positions of a relative-space point.
pub fn classify_ordering(
    point: &[f64],
    frame: &JacobiFrame,
    sys: &MassSystem,
    planes: &BoundaryPlaneSet,
    tolerance: f64,
) -> Result<Classified> {
    let r = norm(point);
    if r == 0.0 {
        return Err(Error::Domain("origin has no ordering".into()));
    }
    let unit: Vec<f64> = point.iter().map(|c| c / r).collect();
    let species: Vec<char> = sys.particles().iter().map(|p| p.species).collect();
    for p in &planes.planes {
        let d: f64 = p.unit_normal().iter().zip(&unit).map(|(a, b)| a * b).sum();
        let (i, j) = p.pair;
        let matters = p.kind == PlaneKind::HardWall || species[i] != species[j];
        if matters && d.abs() < tolerance {
            return Err(Error::AmbiguousClassification { i: i + 1, j: j + 1, tolerance });
        }
    }
    let q = frame.from_jacobi(&unit, 0.0);
    let mut ordering: Vec<usize> = (0..q.len()).collect();
    ordering.sort_by(|&a, &b| q[a].total_cmp(&q[b]).then(a.cmp(&b)));
    let word = ordering.iter().map(|&i| species[i]).collect();
    let key = SectorTable::new(sys)?.key_of(&q);
    Ok(Classified { ordering, word, key })
}
