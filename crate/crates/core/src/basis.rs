//! Truncated computational basis of an open N-site chain.
//!
//! A configuration is stored as an integer bit pattern. Site 1 (the left
//! edge) occupies the most significant of the `n_sites` low bits, so the
//! ascending integer order of the patterns is also the lexicographic order of
//! the occupation strings read left to right.

use alloc::string::String;
use alloc::vec::Vec;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Bit pattern of one configuration.
pub type Config = u64;

/// Largest chain representable by [`Config`].
pub const MAX_SITES: usize = 63;

/// Default limit on the number of basis configurations.
pub const DEFAULT_CAPACITY: u64 = 1 << 24;

/// Shape of the chain and the truncation applied to its Hilbert space.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainGeometry {
    pub n_sites: usize,
    /// Maximum number of nearest-neighbour `11` pairs a configuration may hold.
    pub max_adjacent_pairs: usize,
    /// Number of neighbour distances of the V/|i-j|^6 tail that are kept.
    pub interaction_range: usize,
}

impl ChainGeometry {
    pub fn new(
        n_sites: usize,
        max_adjacent_pairs: usize,
        interaction_range: usize,
    ) -> Result<Self> {
        let g = ChainGeometry {
            n_sites,
            max_adjacent_pairs,
            interaction_range,
        };
        g.validate()?;
        Ok(g)
    }

    /// Hard blockade (no adjacent excitations) with the default three-neighbour
    /// interaction tail.
    pub fn blockaded(n_sites: usize) -> Self {
        ChainGeometry {
            n_sites,
            max_adjacent_pairs: 0,
            interaction_range: 3,
        }
    }

    /// The untruncated 2^N space.
    pub fn full(n_sites: usize) -> Self {
        ChainGeometry {
            n_sites,
            max_adjacent_pairs: n_sites.saturating_sub(1),
            interaction_range: 3,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_sites == 0 || self.n_sites > MAX_SITES {
            return Err(Error::Geometry(alloc::format!(
                "n_sites must lie in 1..={MAX_SITES}, got {}",
                self.n_sites
            )));
        }
        if self.max_adjacent_pairs > self.n_sites.saturating_sub(1) {
            return Err(Error::Geometry(alloc::format!(
                "max_adjacent_pairs = {} exceeds n_sites - 1 = {}",
                self.max_adjacent_pairs,
                self.n_sites - 1
            )));
        }
        if self.interaction_range == 0 {
            return Err(Error::Geometry(
                "interaction_range must be at least 1".into(),
            ));
        }
        Ok(())
    }

    /// Bit mask of site `i` (1-based).
    #[inline]
    pub fn site_mask(&self, i: usize) -> Config {
        debug_assert!((1..=self.n_sites).contains(&i));
        1 << (self.n_sites - i)
    }

    #[inline]
    pub fn occupation(&self, config: Config, i: usize) -> u8 {
        ((config >> (self.n_sites - i)) & 1) as u8
    }

    /// The all-sites mask.
    #[inline]
    pub fn full_mask(&self) -> Config {
        if self.n_sites == 64 {
            !0
        } else {
            (1 << self.n_sites) - 1
        }
    }

    /// Site-reversed pattern.
    #[inline]
    pub fn reflect(&self, config: Config) -> Config {
        config.reverse_bits() >> (64 - self.n_sites)
    }

    /// |0101…⟩: every even site excited, staggered magnetization +N.
    pub fn antiferromagnet_a(&self) -> Config {
        (1..=self.n_sites)
            .filter(|i| i % 2 == 0)
            .fold(0, |acc, i| acc | self.site_mask(i))
    }

    /// |1010…⟩: every odd site excited, staggered magnetization −N for even N.
    pub fn antiferromagnet_abar(&self) -> Config {
        (1..=self.n_sites)
            .filter(|i| i % 2 == 1)
            .fold(0, |acc, i| acc | self.site_mask(i))
    }

    /// Parses an occupation string such as `"0101"` (site 1 first).
    pub fn parse_pattern(&self, s: &str) -> Result<Config> {
        if s.len() != self.n_sites {
            return Err(Error::Shape {
                context: "pattern length",
                expected: self.n_sites,
                found: s.len(),
            });
        }
        let mut c = 0;
        for ch in s.bytes() {
            c <<= 1;
            match ch {
                b'0' => {}
                b'1' => c |= 1,
                _ => {
                    return Err(Error::invalid(
                        "pattern",
                        alloc::format!("unexpected character in {s:?}"),
                    ))
                }
            }
        }
        Ok(c)
    }

    pub fn format_pattern(&self, config: Config) -> String {
        (1..=self.n_sites)
            .map(|i| {
                if self.occupation(config, i) == 1 {
                    '1'
                } else {
                    '0'
                }
            })
            .collect()
    }
}

/// Number of nearest-neighbour `11` pairs in a pattern.
#[inline]
pub fn adjacent_pairs(config: Config) -> u32 {
    (config & (config >> 1)).count_ones()
}

/// Σ_{i=1}^{N} (−1)^i (2 n_i − 1).
pub fn staggered_magnetization(geometry: &ChainGeometry, config: Config) -> i32 {
    (1..=geometry.n_sites)
        .map(|i| {
            let sz = 2 * geometry.occupation(config, i) as i32 - 1;
            if i % 2 == 0 {
                sz
            } else {
                -sz
            }
        })
        .sum()
}

/// Enumerated configuration space with cached per-configuration observables.
#[derive(Clone, Debug)]
pub struct Basis {
    geometry: ChainGeometry,
    configs: Vec<Config>,
    excitations: Vec<u32>,
    magnetization: Vec<i32>,
    parity: Vec<i8>,
    partner: Vec<usize>,
}

/// Number of valid patterns, counted without enumerating them.
pub fn basis_size(geometry: &ChainGeometry) -> u64 {
    let pairs = geometry.max_adjacent_pairs;
    // ways[last][p]: strings so far ending in `last` with p adjacent pairs.
    let mut ways = [alloc::vec![0u64; pairs + 1], alloc::vec![0u64; pairs + 1]];
    ways[0][0] = 1;
    ways[1][0] = 1;
    for _ in 1..geometry.n_sites {
        let mut next = [alloc::vec![0u64; pairs + 1], alloc::vec![0u64; pairs + 1]];
        for p in 0..=pairs {
            next[0][p] = ways[0][p].saturating_add(ways[1][p]);
            next[1][p] = ways[0][p];
            if p > 0 {
                next[1][p] = next[1][p].saturating_add(ways[1][p - 1]);
            }
        }
        ways = next;
    }
    ways.iter()
        .flat_map(|w| w.iter())
        .fold(0u64, |a, &b| a.saturating_add(b))
}

impl Basis {
    pub fn enumerate(geometry: ChainGeometry) -> Result<Self> {
        Self::enumerate_with_capacity(geometry, DEFAULT_CAPACITY)
    }

    pub fn enumerate_with_capacity(geometry: ChainGeometry, capacity: u64) -> Result<Self> {
        geometry.validate()?;
        let size = basis_size(&geometry);
        if size > capacity {
            return Err(Error::Capacity {
                size,
                limit: capacity,
            });
        }
        let mut configs = Vec::with_capacity(size as usize);
        // Depth-first from site 1, choosing 0 before 1, yields ascending order.
        let n = geometry.n_sites;
        let max_pairs = geometry.max_adjacent_pairs as u32;
        let mut stack: Vec<(usize, Config, u32)> = alloc::vec![(0, 0, 0)];
        while let Some((placed, prefix, pairs)) = stack.pop() {
            if placed == n {
                configs.push(prefix);
                continue;
            }
            let last = prefix & 1;
            let with_one = prefix << 1 | 1;
            let one_pairs = pairs + if placed > 0 { last as u32 } else { 0 };
            if one_pairs <= max_pairs {
                stack.push((placed + 1, with_one, one_pairs));
            }
            stack.push((placed + 1, prefix << 1, pairs));
        }
        debug_assert_eq!(configs.len() as u64, size);
        debug_assert!(configs.windows(2).all(|w| w[0] < w[1]));

        let excitations: Vec<u32> = configs.iter().map(|c| c.count_ones()).collect();
        let magnetization = configs
            .iter()
            .map(|&c| staggered_magnetization(&geometry, c))
            .collect();
        let parity = excitations
            .iter()
            .map(|&k| if (n as u32 - k) % 2 == 0 { 1 } else { -1 })
            .collect();
        let partner = configs
            .iter()
            .map(|&c| {
                let r = geometry.reflect(c);
                configs
                    .binary_search(&r)
                    .expect("truncation rule is reflection invariant")
            })
            .collect();

        Ok(Basis {
            geometry,
            configs,
            excitations,
            magnetization,
            parity,
            partner,
        })
    }

    #[inline]
    pub fn geometry(&self) -> &ChainGeometry {
        &self.geometry
    }

    #[inline]
    pub fn n_sites(&self) -> usize {
        self.geometry.n_sites
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.configs.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.configs.is_empty()
    }

    #[inline]
    pub fn configs(&self) -> &[Config] {
        &self.configs
    }

    #[inline]
    pub fn config(&self, ordinal: usize) -> Config {
        self.configs[ordinal]
    }

    /// Ordinal of a pattern, or `None` if the truncation excludes it.
    #[inline]
    pub fn index_of(&self, config: Config) -> Option<usize> {
        self.configs.binary_search(&config).ok()
    }

    #[inline]
    pub fn excitations(&self, ordinal: usize) -> u32 {
        self.excitations[ordinal]
    }

    #[inline]
    pub fn magnetization(&self, ordinal: usize) -> i32 {
        self.magnetization[ordinal]
    }

    /// Eigenvalue of Π_i σ_z^(i), with σ_z = 2n − 1.
    #[inline]
    pub fn parity(&self, ordinal: usize) -> i8 {
        self.parity[ordinal]
    }

    /// Ordinal of the site-reversed configuration.
    #[inline]
    pub fn partner(&self, ordinal: usize) -> usize {
        self.partner[ordinal]
    }

    /// Ordinals of |A_N⟩ = |0101…⟩ and |Ā_N⟩ = |1010…⟩.
    pub fn ghz_components(&self) -> Result<(usize, usize)> {
        let a = self.index_of(self.geometry.antiferromagnet_a());
        let abar = self.index_of(self.geometry.antiferromagnet_abar());
        match (a, abar) {
            (Some(a), Some(abar)) if self.geometry.n_sites % 2 == 0 => Ok((a, abar)),
            _ => Err(Error::invalid(
                "n_sites",
                "GHZ components need an even chain",
            )),
        }
    }

    /// Amplitudes expressed over `other`, which must contain every configuration
    /// of `self` (widening the truncation, typically to the full space).
    pub fn embed_into(
        &self,
        other: &Basis,
        amplitudes: &[Complex64],
    ) -> Result<alloc::vec::Vec<Complex64>> {
        if amplitudes.len() != self.len() {
            return Err(Error::Shape {
                context: "embed_into",
                expected: self.len(),
                found: amplitudes.len(),
            });
        }
        if other.n_sites() != self.n_sites() {
            return Err(Error::Shape {
                context: "embed_into sites",
                expected: self.n_sites(),
                found: other.n_sites(),
            });
        }
        let mut out = alloc::vec![Complex64::new(0.0, 0.0); other.len()];
        for (j, &c) in self.configs.iter().enumerate() {
            let k = other.index_of(c).ok_or_else(|| {
                Error::invalid("basis", "target basis is narrower than the source")
            })?;
            out[k] = amplitudes[j];
        }
        Ok(out)
    }
}

/// Reflection sector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sector {
    Even,
    Odd,
}

/// One orthonormal reflection-(anti)symmetric state: either a reflection
/// fixed point or the (anti)symmetric combination of a configuration with its
/// mirror image, `(|first⟩ ± |second⟩)/√2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SectorState {
    pub first: usize,
    pub second: Option<usize>,
}

/// Basis of one reflection sector, expressed in ordinals of the parent basis.
#[derive(Clone, Debug)]
pub struct SymmetrizedBasis {
    sector: Sector,
    parent_len: usize,
    states: Vec<SectorState>,
    /// For each parent ordinal: (sector index, coefficient), if it appears.
    lookup: Vec<Option<(usize, f64)>>,
}

/// Splits a basis into one reflection sector.
pub fn symmetry_sector(basis: &Basis, sector: Sector) -> SymmetrizedBasis {
    let h = core::f64::consts::FRAC_1_SQRT_2;
    let mut states = Vec::new();
    let mut lookup = alloc::vec![None; basis.len()];
    for j in 0..basis.len() {
        let p = basis.partner(j);
        if p == j {
            if sector == Sector::Even {
                lookup[j] = Some((states.len(), 1.0));
                states.push(SectorState {
                    first: j,
                    second: None,
                });
            }
        } else if j < p {
            let sign = match sector {
                Sector::Even => 1.0,
                Sector::Odd => -1.0,
            };
            lookup[j] = Some((states.len(), h));
            lookup[p] = Some((states.len(), sign * h));
            states.push(SectorState {
                first: j,
                second: Some(p),
            });
        }
    }
    SymmetrizedBasis {
        sector,
        parent_len: basis.len(),
        states,
        lookup,
    }
}

impl SymmetrizedBasis {
    #[inline]
    pub fn sector(&self) -> Sector {
        self.sector
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.states.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    #[inline]
    pub fn parent_len(&self) -> usize {
        self.parent_len
    }

    #[inline]
    pub fn states(&self) -> &[SectorState] {
        &self.states
    }

    /// Sector index and expansion coefficient of a parent configuration.
    #[inline]
    pub fn lookup(&self, parent: usize) -> Option<(usize, f64)> {
        self.lookup[parent]
    }

    /// Coefficients of sector state `index` on its parent configurations.
    pub fn components(&self, index: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let s = self.states[index];
        let first = self.lookup[s.first].map(|(_, c)| c).unwrap_or(0.0);
        core::iter::once((s.first, first)).chain(
            s.second
                .map(|p| (p, self.lookup[p].map(|(_, c)| c).unwrap_or(0.0))),
        )
    }

    /// Lifts sector amplitudes to the parent basis.
    pub fn embed(&self, amplitudes: &[Complex64]) -> Result<Vec<Complex64>> {
        if amplitudes.len() != self.len() {
            return Err(Error::Shape {
                context: "sector embed",
                expected: self.len(),
                found: amplitudes.len(),
            });
        }
        let mut out = alloc::vec![Complex64::new(0.0, 0.0); self.parent_len];
        for (idx, &a) in amplitudes.iter().enumerate() {
            for (j, c) in self.components(idx) {
                out[j] += a * c;
            }
        }
        Ok(out)
    }

    /// Orthogonal projection of parent amplitudes onto the sector.
    pub fn project(&self, amplitudes: &[Complex64]) -> Result<Vec<Complex64>> {
        if amplitudes.len() != self.parent_len {
            return Err(Error::Shape {
                context: "sector project",
                expected: self.parent_len,
                found: amplitudes.len(),
            });
        }
        let mut out = alloc::vec![Complex64::new(0.0, 0.0); self.len()];
        for (j, &a) in amplitudes.iter().enumerate() {
            if let Some((idx, c)) = self.lookup[j] {
                out[idx] += a * c;
            }
        }
        Ok(out)
    }
}

/// Weight of a parent state inside the given sector: ‖P ψ‖².
pub fn sector_weight(sym: &SymmetrizedBasis, amplitudes: &[Complex64]) -> Result<f64> {
    Ok(sym.project(amplitudes)?.iter().map(|a| a.norm_sqr()).sum())
}
