use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Statistics {
    Boson,
    Fermion,
}

impl Statistics {
    /// Sign picked up by the wavefunction under exchange of two such particles.
    pub fn exchange_sign(self) -> f64 {
        match self {
            Statistics::Boson => 1.0,
            Statistics::Fermion => -1.0,
        }
    }

    fn from_char(c: char) -> Result<Self> {
        match c.to_ascii_lowercase() {
            'b' => Ok(Statistics::Boson),
            'f' => Ok(Statistics::Fermion),
            other => Err(Error::Config(format!("unknown statistics label '{other}'"))),
        }
    }
}

impl fmt::Display for Statistics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Statistics::Boson => "b",
            Statistics::Fermion => "f",
        })
    }
}

/// Pairwise contact coupling; only the two limits are supported.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Coupling {
    Zero,
    Infinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CouplingPattern {
    /// Infinite between different species, zero within a species.
    InterspeciesInfinite,
    /// Every pair infinitely repulsive.
    AllInfinite,
}

impl FromStr for CouplingPattern {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "interspecies-infinite" => Ok(CouplingPattern::InterspeciesInfinite),
            "all-infinite" => Ok(CouplingPattern::AllInfinite),
            other => Err(Error::Config(format!("unknown coupling pattern '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Particle {
    /// In units of an arbitrary reference mass.
    pub mass: f64,
    pub species: char,
    pub statistics: Statistics,
}

/// Masses, statistics and the contact-coupling graph of `N` trapped particles.
///
/// The trap frequency is common to all particles and fixed to one (oscillator units).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MassSystem {
    particles: Vec<Particle>,
    couplings: Vec<Vec<Coupling>>,
}

impl MassSystem {
    pub fn new(particles: Vec<Particle>, couplings: Vec<Vec<Coupling>>) -> Result<Self> {
        let n = particles.len();
        if n < 2 {
            return Err(Error::InvalidSystem("need at least two particles".into()));
        }
        for (i, p) in particles.iter().enumerate() {
            if !(p.mass > 0.0 && p.mass.is_finite()) {
                return Err(Error::Domain(format!("mass of particle {} must be positive, got {}", i + 1, p.mass)));
            }
        }
        if couplings.len() != n || couplings.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidSystem("coupling matrix must be N x N".into()));
        }
        for i in 0..n {
            if couplings[i][i] != Coupling::Zero {
                return Err(Error::InvalidSystem("coupling diagonal must be zero".into()));
            }
            for j in 0..n {
                if couplings[i][j] != couplings[j][i] {
                    return Err(Error::InvalidSystem(format!("couplings not symmetric at ({}, {})", i + 1, j + 1)));
                }
            }
        }
        // identical species must be interchangeable
        for i in 0..n {
            for j in (i + 1)..n {
                let (a, b) = (&particles[i], &particles[j]);
                if a.species != b.species {
                    continue;
                }
                if a.statistics != b.statistics {
                    return Err(Error::InvalidSystem(format!("species '{}' mixes statistics", a.species)));
                }
                if (a.mass - b.mass).abs() > 1e-12 * a.mass.max(b.mass) {
                    return Err(Error::InvalidSystem(format!("species '{}' has unequal masses", a.species)));
                }
                for k in 0..n {
                    if k != i && k != j && couplings[i][k] != couplings[j][k] {
                        return Err(Error::InvalidSystem(format!(
                            "particles {} and {} share species '{}' but couple differently to {}",
                            i + 1,
                            j + 1,
                            a.species,
                            k + 1
                        )));
                    }
                }
            }
        }
        Ok(Self { particles, couplings })
    }

    pub fn with_pattern(masses: &[f64], species: &str, statistics: &str, pattern: CouplingPattern) -> Result<Self> {
        let species: Vec<char> = species.chars().collect();
        let stats: Vec<char> = statistics.chars().collect();
        if species.len() != masses.len() || stats.len() != masses.len() {
            return Err(Error::Config(format!(
                "masses ({}), species ({}) and statistics ({}) lengths differ",
                masses.len(),
                species.len(),
                stats.len()
            )));
        }
        let particles = masses
            .iter()
            .zip(&species)
            .zip(&stats)
            .map(|((&mass, &species), &s)| Ok(Particle { mass, species, statistics: Statistics::from_char(s)? }))
            .collect::<Result<Vec<_>>>()?;
        let n = particles.len();
        let mut couplings = vec![vec![Coupling::Zero; n]; n];
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                couplings[i][j] = match pattern {
                    CouplingPattern::AllInfinite => Coupling::Infinite,
                    CouplingPattern::InterspeciesInfinite if particles[i].species != particles[j].species => {
                        Coupling::Infinite
                    }
                    CouplingPattern::InterspeciesInfinite => Coupling::Zero,
                };
            }
        }
        Self::new(particles, couplings)
    }

    /// Two `A` particles of mass 1 and two `B` particles of mass `beta`,
    /// infinite inter-species and vanishing intra-species coupling.
    pub fn two_plus_two(beta: f64, a: Statistics, b: Statistics) -> Result<Self> {
        let stats = format!("{a}{a}{b}{b}");
        Self::with_pattern(&[1.0, 1.0, beta, beta], "AABB", &stats, CouplingPattern::InterspeciesInfinite)
    }

    /// Three identical `A` particles of mass 1 and one impurity `B` of mass `beta`.
    pub fn three_plus_one(beta: f64, majority: Statistics) -> Result<Self> {
        let stats = format!("{majority}{majority}{majority}b");
        Self::with_pattern(&[1.0, 1.0, 1.0, beta], "AAAB", &stats, CouplingPattern::InterspeciesInfinite)
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    pub fn particles(&self) -> &[Particle] {
        &self.particles
    }

    pub fn masses(&self) -> Vec<f64> {
        self.particles.iter().map(|p| p.mass).collect()
    }

    pub fn total_mass(&self) -> f64 {
        self.particles.iter().map(|p| p.mass).sum()
    }

    pub fn coupling(&self, i: usize, j: usize) -> Coupling {
        self.couplings[i][j]
    }

    pub fn species_word(&self) -> String {
        self.particles.iter().map(|p| p.species).collect()
    }

    /// Indices of the particles of one species, in order.
    pub fn members(&self, species: char) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.particles[i].species == species).collect()
    }

    pub fn species(&self) -> Vec<char> {
        let mut out: Vec<char> = Vec::new();
        for p in &self.particles {
            if !out.contains(&p.species) {
                out.push(p.species);
            }
        }
        out
    }

    /// The reference mass `(Π m_i / M)^{1/(N-1)}`.
    pub fn default_mu(&self) -> f64 {
        let n = self.len() as f64;
        let log_prod: f64 = self.particles.iter().map(|p| p.mass.ln()).sum();
        ((log_prod - self.total_mass().ln()) / (n - 1.0)).exp()
    }
}

/// Shorthand such as `2b2f` (2+2, bosonic A, fermionic B) or `3f1` (3+1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SystemSpec {
    TwoPlusTwo { a: Statistics, b: Statistics },
    ThreePlusOne { majority: Statistics },
}

impl SystemSpec {
    pub fn build(&self, beta: f64) -> Result<MassSystem> {
        match *self {
            SystemSpec::TwoPlusTwo { a, b } => MassSystem::two_plus_two(beta, a, b),
            SystemSpec::ThreePlusOne { majority } => MassSystem::three_plus_one(beta, majority),
        }
    }
}

impl FromStr for SystemSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().replace('+', "");
        let c: Vec<char> = s.chars().collect();
        match c.as_slice() {
            ['2', a, '2', b] => Ok(SystemSpec::TwoPlusTwo { a: Statistics::from_char(*a)?, b: Statistics::from_char(*b)? }),
            ['3', m, '1'] | ['3', m, '1', 'b'] => Ok(SystemSpec::ThreePlusOne { majority: Statistics::from_char(*m)? }),
            _ => Err(Error::Config(format!("unrecognized system '{s}' (expected e.g. 2b2f or 3f1)"))),
        }
    }
}

impl fmt::Display for SystemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SystemSpec::TwoPlusTwo { a, b } => write!(f, "2{a}2{b}"),
            SystemSpec::ThreePlusOne { majority } => write!(f, "3{majority}1"),
        }
    }
}

/// On-disk mass-system description.
///
/// ```toml
/// masses = [1.0, 1.0, 5.0, 5.0]
/// species = "AABB"
/// statistics = "bbff"
/// coupling = "interspecies-infinite"
/// ```
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SystemFile {
    pub masses: Vec<f64>,
    pub species: String,
    pub statistics: String,
    #[serde(default = "default_pattern")]
    pub coupling: String,
}

fn default_pattern() -> String {
    "interspecies-infinite".into()
}

impl SystemFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn build(&self) -> Result<MassSystem> {
        MassSystem::with_pattern(&self.masses, &self.species, &self.statistics, self.coupling.parse()?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_positive_mass() {
        let err = MassSystem::with_pattern(&[1.0, -1.0], "AB", "bb", CouplingPattern::AllInfinite).unwrap_err();
        assert!(matches!(err, Error::Domain(_)));
    }

    #[test]
    fn rejects_unequal_identical_masses() {
        assert!(MassSystem::with_pattern(&[1.0, 2.0, 3.0, 3.0], "AABB", "bbbb", CouplingPattern::InterspeciesInfinite).is_err());
    }

    #[test]
    fn pattern_sets_interspecies_walls() {
        let s = MassSystem::two_plus_two(5.0, Statistics::Boson, Statistics::Fermion).unwrap();
        assert_eq!(s.coupling(0, 1), Coupling::Zero);
        assert_eq!(s.coupling(2, 3), Coupling::Zero);
        assert_eq!(s.coupling(0, 2), Coupling::Infinite);
        assert_eq!(s.coupling(1, 3), Coupling::Infinite);
        assert_eq!(s.species_word(), "AABB");
    }

    #[test]
    fn default_mu_for_equal_masses() {
        let s = MassSystem::two_plus_two(1.0, Statistics::Boson, Statistics::Boson).unwrap();
        // (1/4)^{1/3}
        assert!((s.default_mu() - 0.25f64.powf(1.0 / 3.0)).abs() < 1e-14);
    }

    #[test]
    fn parses_specs_and_files() {
        assert_eq!(
            "2b2f".parse::<SystemSpec>().unwrap(),
            SystemSpec::TwoPlusTwo { a: Statistics::Boson, b: Statistics::Fermion }
        );
        assert_eq!("3f1".parse::<SystemSpec>().unwrap(), SystemSpec::ThreePlusOne { majority: Statistics::Fermion });
        assert!("2x2b".parse::<SystemSpec>().is_err());
        let f = SystemFile::parse("masses = [1.0, 1.0, 5.0, 5.0]\nspecies = \"AABB\"\nstatistics = \"bbff\"\ncoupling = \"interspecies-infinite\"\n").unwrap();
        let s = f.build().unwrap();
        assert_eq!(s.particles()[3].statistics, Statistics::Fermion);
        assert_eq!(s.coupling(1, 2), Coupling::Infinite);
    }
}
