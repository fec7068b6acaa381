//! Unit-energy constellations with Gray labeling.
//!
//! Square and rectangular QAM points are stored in grid order: the point at
//! index `i * n2 + q` has unscaled coordinates `(2i - (n1 - 1)) + j(2q - (n2 - 1))`.
//! Bit labels are Gray codes per axis, the first `log2(n1)` bits selecting the
//! in-phase level.

use std::fmt;

use num_complex::Complex64;

use crate::error::{MbmError, Result};

/// A point on the unscaled odd-integer QAM grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GridPoint {
    pub re: i32,
    pub im: i32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    name: String,
    points: Vec<Complex64>,
    bits_per_point: usize,
    pam_sizes: Option<(usize, usize)>,
    scale: f64,
}

pub fn gray_encode(n: usize) -> usize {
    n ^ (n >> 1)
}

pub fn gray_decode(mut g: usize) -> usize {
    let mut n = g;
    while g > 1 {
        g >>= 1;
        n ^= g;
    }
    n
}

impl Constellation {
    /// Square or rectangular QAM with `n1` in-phase and `n2` quadrature levels.
    pub fn qam(n1: usize, n2: usize) -> Result<Self> {
        if n1 < 2 || n2 < 2 || !n1.is_power_of_two() || !n2.is_power_of_two() {
            return Err(MbmError::InvalidConfig(format!(
                "QAM PAM sizes must be powers of two >= 2, got {n1}x{n2}"
            )));
        }
        let energy = ((n1 * n1 - 1) + (n2 * n2 - 1)) as f64 / 3.0;
        let scale = 1.0 / energy.sqrt();
        let mut points = Vec::with_capacity(n1 * n2);
        for i in 0..n1 {
            for q in 0..n2 {
                let re = (2 * i) as f64 - (n1 - 1) as f64;
                let im = (2 * q) as f64 - (n2 - 1) as f64;
                points.push(Complex64::new(re * scale, im * scale));
            }
        }
        let size = n1 * n2;
        Ok(Self {
            name: format!("{size}-QAM"),
            points,
            bits_per_point: size.trailing_zeros() as usize,
            pam_sizes: Some((n1, n2)),
            scale,
        })
    }

    pub fn bpsk() -> Self {
        Self {
            name: "BPSK".to_string(),
            points: vec![Complex64::new(-1.0, 0.0), Complex64::new(1.0, 0.0)],
            bits_per_point: 1,
            pam_sizes: None,
            scale: 1.0,
        }
    }

    pub fn qam4() -> Self {
        Self::qam(2, 2).expect("valid PAM sizes")
    }

    pub fn qam16() -> Self {
        Self::qam(4, 4).expect("valid PAM sizes")
    }

    pub fn qam64() -> Self {
        Self::qam(8, 8).expect("valid PAM sizes")
    }

    /// Parses labels such as `4qam`, `qpsk`, `16-QAM`, `8qam` or `bpsk`.
    pub fn from_name(name: &str) -> Result<Self> {
        let key: String = name
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect::<String>()
            .to_ascii_lowercase();
        match key.as_str() {
            "bpsk" | "2qam" => Ok(Self::bpsk()),
            "qpsk" | "4qam" => Ok(Self::qam4()),
            "8qam" => Self::qam(4, 2),
            "16qam" => Ok(Self::qam16()),
            "32qam" => Self::qam(8, 4),
            "64qam" => Ok(Self::qam64()),
            "128qam" => Self::qam(16, 8),
            "256qam" => Self::qam(16, 16),
            _ => Err(MbmError::InvalidConfig(format!(
                "unknown constellation `{name}`"
            ))),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, index: usize) -> Complex64 {
        self.points[index]
    }

    pub fn bits_per_point(&self) -> usize {
        self.bits_per_point
    }

    pub fn pam_sizes(&self) -> Option<(usize, usize)> {
        self.pam_sizes
    }

    /// Factor mapping the odd-integer grid onto unit average energy.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Point index carried by a Gray-labeled bit pattern (`label` read MSB-first).
    pub fn index_of_label(&self, label: usize) -> usize {
        match self.pam_sizes {
            Some((_, n2)) => {
                let q_bits = n2.trailing_zeros();
                let i_pos = gray_decode(label >> q_bits);
                let q_pos = gray_decode(label & (n2 - 1));
                i_pos * n2 + q_pos
            }
            None => gray_decode(label),
        }
    }

    /// Inverse of [`Constellation::index_of_label`].
    pub fn label_of_index(&self, index: usize) -> usize {
        match self.pam_sizes {
            Some((_, n2)) => {
                let q_bits = n2.trailing_zeros();
                (gray_encode(index / n2) << q_bits) | gray_encode(index % n2)
            }
            None => gray_encode(index),
        }
    }

    /// Index of the grid point, if it lies on this constellation's grid.
    pub fn index_of_grid(&self, p: GridPoint) -> Option<usize> {
        let (n1, n2) = self.pam_sizes?;
        let level = |v: i32, n: usize| -> Option<usize> {
            let shifted = v + (n as i32 - 1);
            (shifted >= 0 && shifted % 2 == 0 && (shifted as usize) < 2 * n)
                .then_some(shifted as usize / 2)
        };
        Some(level(p.re, n1)? * n2 + level(p.im, n2)?)
    }

    /// Brute-force nearest point; ties go to the lower index.
    pub fn nearest_point(&self, z: Complex64) -> usize {
        let mut best = 0;
        let mut best_dist = f64::INFINITY;
        for (i, p) in self.points.iter().enumerate() {
            let d = (z - p).norm_sqr();
            if d < best_dist {
                best_dist = d;
                best = i;
            }
        }
        best
    }

    /// Hard decision using the per-axis PAM slicer for QAM and a full scan otherwise.
    pub fn quantize(&self, z: Complex64) -> usize {
        match self.pam_sizes {
            Some((n1, n2)) => {
                let grid = qam_fast_quantize(z / self.scale, n1, n2);
                self.index_of_grid(grid)
                    .expect("slicer output lies on the grid")
            }
            None => self.nearest_point(z),
        }
    }

    pub fn mean_energy(&self) -> f64 {
        self.points.iter().map(|p| p.norm_sqr()).sum::<f64>() / self.points.len() as f64
    }
}

impl fmt::Display for Constellation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

/// Nearest-point quantization against an arbitrary constellation.
pub fn nearest_point_quantize(z: Complex64, constellation: &Constellation) -> usize {
    constellation.nearest_point(z)
}

fn pam_slice(m: f64, n: usize) -> i32 {
    let edge = n as f64 - 1.0;
    let level = 2.0 * (m / 2.0).ceil() - 1.0;
    level.clamp(-edge, edge) as i32
}

/// Per-axis PAM slicer for `n1 x n2` QAM on the unscaled odd-integer grid.
///
/// Each axis maps `m` to `clamp(2 * round((m + 1) / 2) - 1, -(N - 1), N - 1)`.
/// Halves round down, so a point midway between two levels goes to the lower
/// one, matching the lower-index tie rule of [`Constellation::nearest_point`].
pub fn qam_fast_quantize(z: Complex64, n1: usize, n2: usize) -> GridPoint {
    GridPoint {
        re: pam_slice(z.re, n1),
        im: pam_slice(z.im, n2),
    }
}
