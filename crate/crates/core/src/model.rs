//! The MBM alphabet: system dimensions, sparse per-user symbols and the
//! bit-to-symbol mapping.
//!
//! A user's `n_rf + log2|A|` bits are split MSB-first: the first `n_rf` bits
//! are the mirror activation pattern index in natural binary, the rest are
//! the Gray label of the constellation point.

use num_complex::Complex64;

use crate::constellation::Constellation;
use crate::error::{MbmError, Result};

/// Largest supported mirror count; keeps `M = 2^n_rf` channel columns in memory.
pub const MAX_RF_MIRRORS: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct MbmConfig {
    n_r: usize,
    users: usize,
    n_rf: usize,
    constellation: Constellation,
    iterations: usize,
    list_size: usize,
}

impl MbmConfig {
    /// Builds a config with `L = 6` iterations and `K = M` list size.
    pub fn new(
        n_r: usize,
        users: usize,
        n_rf: usize,
        constellation: Constellation,
    ) -> Result<Self> {
        if users == 0 {
            return Err(MbmError::InvalidConfig(
                "at least one user is required".into(),
            ));
        }
        if n_r < users {
            return Err(MbmError::InvalidConfig(format!(
                "n_r ({n_r}) must be >= users ({users})"
            )));
        }
        if n_rf == 0 || n_rf > MAX_RF_MIRRORS {
            return Err(MbmError::InvalidConfig(format!(
                "n_rf must be in 1..={MAX_RF_MIRRORS}, got {n_rf}"
            )));
        }
        Ok(Self {
            n_r,
            users,
            n_rf,
            constellation,
            iterations: 6,
            list_size: 1 << n_rf,
        })
    }

    pub fn with_iterations(mut self, iterations: usize) -> Result<Self> {
        if iterations == 0 {
            return Err(MbmError::InvalidConfig("iterations must be >= 1".into()));
        }
        self.iterations = iterations;
        Ok(self)
    }

    pub fn with_list_size(mut self, k: usize) -> Result<Self> {
        if k == 0 || k > self.maps() {
            return Err(MbmError::InvalidListSize {
                k,
                maps: self.maps(),
            });
        }
        self.list_size = k;
        Ok(self)
    }

    pub fn n_r(&self) -> usize {
        self.n_r
    }

    pub fn users(&self) -> usize {
        self.users
    }

    pub fn n_rf(&self) -> usize {
        self.n_rf
    }

    /// Number of mirror activation patterns, `2^n_rf`.
    pub fn maps(&self) -> usize {
        1 << self.n_rf
    }

    pub fn constellation(&self) -> &Constellation {
        &self.constellation
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn list_size(&self) -> usize {
        self.list_size
    }

    pub fn bits_per_user(&self) -> usize {
        self.n_rf + self.constellation.bits_per_point()
    }

    pub fn bits_per_frame(&self) -> usize {
        self.users * self.bits_per_user()
    }

    /// `U (n_rf + log2|A|)` bits per channel use.
    pub fn spectral_efficiency(&self) -> f64 {
        self.bits_per_frame() as f64
    }

    /// Per-user and joint signal set sizes, `M|A|` and `(M|A|)^U`.
    pub fn signal_set_size(&self) -> Result<(u64, u128)> {
        let per_user = (self.maps() * self.constellation.len()) as u64;
        let joint = u32::try_from(self.users)
            .ok()
            .and_then(|u| (per_user as u128).checked_pow(u))
            .ok_or(MbmError::SizeOverflow {
                per_user,
                users: self.users,
            })?;
        Ok((per_user, joint))
    }

    pub fn encode(&self, bits: &[bool]) -> Result<MbmSymbol> {
        let expected = self.bits_per_user();
        if bits.len() != expected {
            return Err(MbmError::BitCount {
                expected,
                actual: bits.len(),
            });
        }
        let (map_bits, point_bits) = bits.split_at(self.n_rf);
        let map_index = bits_to_usize(map_bits);
        let point_index = self.constellation.index_of_label(bits_to_usize(point_bits));
        Ok(MbmSymbol::Active {
            map_index,
            point_index,
        })
    }

    pub fn decode(&self, symbol: MbmSymbol) -> Result<Vec<bool>> {
        let mut out = Vec::with_capacity(self.bits_per_user());
        self.decode_into(symbol, &mut out)?;
        Ok(out)
    }

    /// Appends the bits carried by `symbol` to `out`.
    pub fn decode_into(&self, symbol: MbmSymbol, out: &mut Vec<bool>) -> Result<()> {
        let (map_index, point_index) = self.check_symbol(symbol)?;
        push_bits(out, map_index, self.n_rf);
        push_bits(
            out,
            self.constellation.label_of_index(point_index),
            self.constellation.bits_per_point(),
        );
        Ok(())
    }

    fn check_symbol(&self, symbol: MbmSymbol) -> Result<(usize, usize)> {
        match symbol {
            MbmSymbol::Zero => Err(MbmError::ZeroSymbol),
            MbmSymbol::Active {
                map_index,
                point_index,
            } => {
                if map_index >= self.maps() || point_index >= self.constellation.len() {
                    Err(MbmError::SymbolOutOfRange(format!(
                        "map {map_index} / point {point_index} for M={} |A|={}",
                        self.maps(),
                        self.constellation.len()
                    )))
                } else {
                    Ok((map_index, point_index))
                }
            }
        }
    }

    /// Every element of the per-user signal set, ordered by (map, point).
    pub fn signal_set(&self) -> impl Iterator<Item = MbmSymbol> + '_ {
        let points = self.constellation.len();
        (0..self.maps()).flat_map(move |map_index| {
            (0..points).map(move |point_index| MbmSymbol::Active {
                map_index,
                point_index,
            })
        })
    }

    /// The nonzero entry of `symbol`, or zero for [`MbmSymbol::Zero`].
    pub fn symbol_value(&self, symbol: MbmSymbol) -> Complex64 {
        match symbol {
            MbmSymbol::Zero => Complex64::new(0.0, 0.0),
            MbmSymbol::Active { point_index, .. } => self.constellation.point(point_index),
        }
    }

    pub fn to_dense(&self, symbol: MbmSymbol) -> Vec<Complex64> {
        to_dense(symbol, &self.constellation, self.maps())
    }
}

/// One user's MBM transmit vector: a single nonzero entry at the active
/// pattern, or the all-zero vector used to initialize detectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum MbmSymbol {
    #[default]
    Zero,
    Active {
        map_index: usize,
        point_index: usize,
    },
}

impl MbmSymbol {
    pub fn new(map_index: usize, point_index: usize) -> Self {
        Self::Active {
            map_index,
            point_index,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Self::Zero)
    }

    pub fn map_index(&self) -> Option<usize> {
        match self {
            Self::Zero => None,
            Self::Active { map_index, .. } => Some(*map_index),
        }
    }
}

/// Dense length-`maps` vector of `symbol`.
pub fn to_dense(symbol: MbmSymbol, constellation: &Constellation, maps: usize) -> Vec<Complex64> {
    let mut v = vec![Complex64::new(0.0, 0.0); maps];
    if let MbmSymbol::Active {
        map_index,
        point_index,
    } = symbol
    {
        v[map_index] = constellation.point(point_index);
    }
    v
}

fn bits_to_usize(bits: &[bool]) -> usize {
    bits.iter().fold(0, |acc, &b| (acc << 1) | b as usize)
}

fn push_bits(out: &mut Vec<bool>, value: usize, width: usize) {
    out.extend((0..width).rev().map(|i| (value >> i) & 1 == 1));
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(users: usize, n_rf: usize, c: Constellation) -> MbmConfig {
        MbmConfig::new(128.max(users), users, n_rf, c).unwrap()
    }

    #[test]
    fn spectral_efficiency_examples() {
        assert_eq!(
            cfg(16, 4, Constellation::qam4()).spectral_efficiency(),
            96.0
        );
        assert_eq!(
            cfg(20, 3, Constellation::qam4()).spectral_efficiency(),
            100.0
        );
        assert_eq!(cfg(1, 1, Constellation::bpsk()).spectral_efficiency(), 2.0);
    }

    #[test]
    fn signal_set_sizes() {
        let (per, joint) = cfg(16, 3, Constellation::qam4()).signal_set_size().unwrap();
        assert_eq!(per, 32);
        assert_eq!(joint, 1u128 << 80);
        assert!((joint as f64 - 1.2e24).abs() / 1.2e24 < 0.01);
        assert_eq!(
            cfg(1, 1, Constellation::bpsk()).signal_set_size().unwrap(),
            (4, 4)
        );
        assert_eq!(
            cfg(2, 2, Constellation::qam4()).signal_set_size().unwrap(),
            (16, 256)
        );
        let big = MbmConfig::new(4096, 40, 16, Constellation::qam64()).unwrap();
        assert!(matches!(
            big.signal_set_size(),
            Err(MbmError::SizeOverflow { .. })
        ));
    }

    #[test]
    fn hand_enumerated_codebook() {
        // n_rf = 2, 4-QAM: [map bits | I bit, Q bit]; I/Q bit 0 selects level -1.
        let c = cfg(1, 2, Constellation::qam4());
        let s = 1.0 / 2f64.sqrt();
        let table = [
            ([false, false, false, false], 0, Complex64::new(-s, -s)),
            ([false, true, true, false], 1, Complex64::new(s, -s)),
            ([true, false, false, true], 2, Complex64::new(-s, s)),
            ([true, true, true, true], 3, Complex64::new(s, s)),
        ];
        for (bits, map, point) in table {
            let sym = c.encode(&bits).unwrap();
            assert_eq!(sym.map_index(), Some(map));
            assert!((c.symbol_value(sym) - point).norm() < 1e-15);
        }
        assert_eq!(
            c.encode(&[false; 4]).unwrap(),
            MbmSymbol::new(0, c.constellation().index_of_label(0))
        );
    }

    #[test]
    fn exhaustive_bijection() {
        for (n_rf, con) in [
            (1, Constellation::bpsk()),
            (3, Constellation::qam4()),
            (4, Constellation::qam16()),
            (8, Constellation::qam16()),
            (2, Constellation::qam(8, 4).unwrap()),
        ] {
            let c = cfg(1, n_rf, con);
            let n = c.bits_per_user();
            let mut seen = std::collections::HashSet::new();
            for word in 0..(1usize << n) {
                let bits: Vec<bool> = (0..n).rev().map(|i| (word >> i) & 1 == 1).collect();
                let sym = c.encode(&bits).unwrap();
                assert!(seen.insert(sym));
                assert_eq!(c.decode(sym).unwrap(), bits);
            }
            assert_eq!(seen.len(), c.signal_set().count());
        }
    }

    #[test]
    fn encode_decode_errors() {
        let c = cfg(1, 2, Constellation::qam4());
        assert_eq!(
            c.encode(&[true; 3]),
            Err(MbmError::BitCount {
                expected: 4,
                actual: 3
            })
        );
        assert_eq!(c.decode(MbmSymbol::Zero), Err(MbmError::ZeroSymbol));
        assert!(c.decode(MbmSymbol::new(4, 0)).is_err());
        assert_eq!(c.decode(MbmSymbol::new(0, 0)).unwrap(), vec![false; 4]);
    }

    #[test]
    fn dense_form() {
        let c = cfg(1, 2, Constellation::qam4());
        let q = c.constellation().point(3);
        let zero = Complex64::new(0.0, 0.0);
        assert_eq!(c.to_dense(MbmSymbol::new(1, 3)), vec![zero, q, zero, zero]);
        assert_eq!(c.to_dense(MbmSymbol::Zero), vec![zero; 4]);
        let mut energy = 0.0;
        for s in c.signal_set() {
            let d = c.to_dense(s);
            assert_eq!(d.iter().filter(|v| v.norm_sqr() > 0.0).count(), 1);
            let e: f64 = d.iter().map(|v| v.norm_sqr()).sum();
            assert!((e - c.symbol_value(s).norm_sqr()).abs() < 1e-15);
            energy += e;
        }
        let n = c.signal_set().count();
        assert_eq!(n, 16);
        assert!((energy / n as f64 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn config_validation() {
        assert!(MbmConfig::new(4, 8, 2, Constellation::qam4()).is_err());
        assert!(MbmConfig::new(4, 0, 2, Constellation::qam4()).is_err());
        assert!(MbmConfig::new(4, 2, 0, Constellation::qam4()).is_err());
        let c = MbmConfig::new(4, 2, 2, Constellation::qam4()).unwrap();
        assert_eq!(c.maps(), 4);
        assert_eq!(c.list_size(), 4);
        assert_eq!(c.iterations(), 6);
        assert!(c.clone().with_list_size(5).is_err());
        assert!(c.clone().with_list_size(0).is_err());
        assert!(c.clone().with_iterations(0).is_err());
    }
}
