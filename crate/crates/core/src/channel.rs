//! Per-user, per-pattern Rayleigh channels, transmission over AWGN and the
//! diagonal approximation of the channel pseudo-inverse.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{MbmError, Result};
use crate::model::{MbmConfig, MbmSymbol};

const DUMP_MAGIC: &[u8; 8] = b"MBMCHAN1";
const DUMP_HEADER_LEN: usize = 8 + 3 * 4;

/// Channel matrix `H_k` of one user together with its cached `W_k = D_k^-1 H_k^H`.
#[derive(Debug, Clone, PartialEq)]
pub struct UserChannel {
    n_r: usize,
    /// Column-major: pattern `m` occupies `[m * n_r, (m + 1) * n_r)`.
    columns: Vec<Complex64>,
    /// Row-major `M x N_r`; row `m` is `h_m^H / ||h_m||^2`.
    pinv_rows: Vec<Complex64>,
    column_norms: Vec<f64>,
}

impl UserChannel {
    /// Wraps column-major `columns` of length `M * n_r`.
    pub fn from_columns(n_r: usize, columns: Vec<Complex64>) -> Result<Self> {
        if n_r == 0 || columns.is_empty() || !columns.len().is_multiple_of(n_r) {
            return Err(MbmError::Dimension(format!(
                "{} entries do not form columns of length {n_r}",
                columns.len()
            )));
        }
        if columns
            .iter()
            .any(|c| !c.re.is_finite() || !c.im.is_finite())
        {
            return Err(MbmError::Dimension("channel entries must be finite".into()));
        }
        let pinv_rows = gram_diag_inverse(&columns, n_r)?;
        let column_norms = columns
            .chunks_exact(n_r)
            .map(|h| h.iter().map(|x| x.norm_sqr()).sum())
            .collect();
        Ok(Self {
            n_r,
            columns,
            pinv_rows,
            column_norms,
        })
    }

    pub fn maps(&self) -> usize {
        self.columns.len() / self.n_r
    }

    pub fn n_r(&self) -> usize {
        self.n_r
    }

    /// `h_k^m`, the channel seen when pattern `m` is active.
    #[inline]
    pub fn column(&self, m: usize) -> &[Complex64] {
        &self.columns[m * self.n_r..(m + 1) * self.n_r]
    }

    /// Row `m` of `W_k`.
    #[inline]
    pub fn pinv_row(&self, m: usize) -> &[Complex64] {
        &self.pinv_rows[m * self.n_r..(m + 1) * self.n_r]
    }

    pub fn column_norm_sqr(&self, m: usize) -> f64 {
        self.column_norms[m]
    }

    /// Entry `(row, m)` of `H_k`.
    pub fn entry(&self, row: usize, m: usize) -> Complex64 {
        self.columns[m * self.n_r + row]
    }
}

/// Row-major rows of `D^-1 H^H` for column-major `columns` with `n_r` rows.
///
/// Row `m` is the conjugated column `m` divided by its squared norm, so
/// `W H` has an exactly unit diagonal.
pub fn gram_diag_inverse(columns: &[Complex64], n_r: usize) -> Result<Vec<Complex64>> {
    let mut out = Vec::with_capacity(columns.len());
    for (m, h) in columns.chunks_exact(n_r).enumerate() {
        let norm: f64 = h.iter().map(|x| x.norm_sqr()).sum();
        if norm <= 0.0 || !norm.is_finite() {
            return Err(MbmError::DegenerateChannel { user: 0, map: m });
        }
        out.extend(h.iter().map(|x| x.conj() / norm));
    }
    Ok(out)
}

/// The channel ensemble of all users for one channel realization.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    n_r: usize,
    maps: usize,
    users: Vec<UserChannel>,
}

impl ChannelSet {
    pub fn new(users: Vec<UserChannel>) -> Result<Self> {
        let first = users
            .first()
            .ok_or_else(|| MbmError::Dimension("channel set needs at least one user".into()))?;
        let (n_r, maps) = (first.n_r(), first.maps());
        if users.iter().any(|u| u.n_r() != n_r || u.maps() != maps) {
            return Err(MbmError::Dimension("users disagree on N_r x M".into()));
        }
        Ok(Self { n_r, maps, users })
    }

    /// Builds from per-user column-major matrices.
    pub fn from_columns(n_r: usize, per_user: Vec<Vec<Complex64>>) -> Result<Self> {
        let users = per_user
            .into_iter()
            .enumerate()
            .map(|(k, cols)| {
                UserChannel::from_columns(n_r, cols).map_err(|e| match e {
                    MbmError::DegenerateChannel { map, .. } => {
                        MbmError::DegenerateChannel { user: k, map }
                    }
                    other => other,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(users)
    }

    pub fn n_r(&self) -> usize {
        self.n_r
    }

    pub fn maps(&self) -> usize {
        self.maps
    }

    pub fn num_users(&self) -> usize {
        self.users.len()
    }

    pub fn user(&self, k: usize) -> &UserChannel {
        &self.users[k]
    }

    pub fn users(&self) -> &[UserChannel] {
        &self.users
    }

    pub fn check_matches(&self, config: &MbmConfig) -> Result<()> {
        if self.n_r != config.n_r()
            || self.maps != config.maps()
            || self.num_users() != config.users()
        {
            return Err(MbmError::Dimension(format!(
                "channel is {}x{} for {} users, config wants {}x{} for {}",
                self.n_r,
                self.maps,
                self.num_users(),
                config.n_r(),
                config.maps(),
                config.users()
            )));
        }
        Ok(())
    }

    /// `sum_k H_k x_k` for the given symbols; zero symbols contribute nothing.
    pub fn superpose(&self, config: &MbmConfig, symbols: &[MbmSymbol]) -> Vec<Complex64> {
        let mut y = vec![Complex64::new(0.0, 0.0); self.n_r];
        for (user, sym) in self.users.iter().zip(symbols) {
            if let MbmSymbol::Active { map_index, .. } = *sym {
                let q = config.symbol_value(*sym);
                for (yi, hi) in y.iter_mut().zip(user.column(map_index)) {
                    *yi += q * hi;
                }
            }
        }
        y
    }

    /// Max over distinct column pairs of the stacked `H` of `|h_i^H h_j| / N_r`.
    pub fn hardening_metric(&self) -> f64 {
        let cols: Vec<&[Complex64]> = self
            .users
            .iter()
            .flat_map(|u| (0..u.maps()).map(move |m| u.column(m)))
            .collect();
        let mut worst = 0.0f64;
        for i in 0..cols.len() {
            for j in (i + 1)..cols.len() {
                let ip: Complex64 = cols[i].iter().zip(cols[j]).map(|(a, b)| a.conj() * b).sum();
                worst = worst.max(ip.norm() / self.n_r as f64);
            }
        }
        worst
    }

    /// Little-endian dump: `b"MBMCHAN1"`, `u32` N_r, `u32` M, `u32` U, then for
    /// each user its `N_r x M` matrix row-major as `(f64 re, f64 im)` pairs.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out =
            Vec::with_capacity(DUMP_HEADER_LEN + 16 * self.n_r * self.maps * self.users.len());
        out.extend_from_slice(DUMP_MAGIC);
        for dim in [self.n_r, self.maps, self.users.len()] {
            out.extend_from_slice(&(dim as u32).to_le_bytes());
        }
        for user in &self.users {
            for row in 0..self.n_r {
                for m in 0..self.maps {
                    let v = user.entry(row, m);
                    out.extend_from_slice(&v.re.to_le_bytes());
                    out.extend_from_slice(&v.im.to_le_bytes());
                }
            }
        }
        out
    }

    /// Parses the layout written by [`ChannelSet::to_bytes`] and recomputes `W_k`.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let bad = |msg: &str| MbmError::MalformedDump(msg.to_string());
        if bytes.len() < DUMP_HEADER_LEN {
            return Err(bad("truncated header"));
        }
        if &bytes[..8] != DUMP_MAGIC {
            return Err(bad("bad magic"));
        }
        let dim = |i: usize| {
            let off = 8 + 4 * i;
            u32::from_le_bytes(bytes[off..off + 4].try_into().expect("4 bytes")) as usize
        };
        let (n_r, maps, users) = (dim(0), dim(1), dim(2));
        if n_r == 0 || maps == 0 || users == 0 {
            return Err(bad("zero dimension"));
        }
        if !maps.is_power_of_two() {
            return Err(bad("pattern count is not a power of two"));
        }
        let payload = n_r
            .checked_mul(maps)
            .and_then(|v| v.checked_mul(users))
            .and_then(|v| v.checked_mul(16))
            .ok_or_else(|| bad("dimensions overflow"))?;
        if bytes.len() - DUMP_HEADER_LEN != payload {
            return Err(bad("payload length does not match header"));
        }
        let mut values = bytes[DUMP_HEADER_LEN..].chunks_exact(16).map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().expect("8 bytes"));
            let im = f64::from_le_bytes(c[8..].try_into().expect("8 bytes"));
            Complex64::new(re, im)
        });
        let mut per_user = Vec::with_capacity(users);
        for _ in 0..users {
            let mut cols = vec![Complex64::new(0.0, 0.0); n_r * maps];
            for row in 0..n_r {
                for m in 0..maps {
                    cols[m * n_r + row] = values.next().expect("length checked");
                }
            }
            per_user.push(cols);
        }
        Self::from_columns(n_r, per_user)
    }
}

/// Total complex noise variance per receive antenna.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    sigma2: f64,
}

impl NoiseModel {
    pub fn new(sigma2: f64) -> Result<Self> {
        if !(sigma2 >= 0.0 && sigma2.is_finite()) {
            return Err(MbmError::InvalidConfig(format!(
                "noise variance must be finite and >= 0, got {sigma2}"
            )));
        }
        Ok(Self { sigma2 })
    }

    pub fn noiseless() -> Self {
        Self { sigma2: 0.0 }
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }
}

/// One `CN(0, 1)` draw: independent real and imaginary parts of variance 1/2.
pub fn sample_cn<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Draws `H_k` for every user, user by user and column by column, each entry `CN(0, 1)`.
pub fn generate_channel<R: Rng + ?Sized>(rng: &mut R, config: &MbmConfig) -> Result<ChannelSet> {
    let (n_r, maps) = (config.n_r(), config.maps());
    let per_user = (0..config.users())
        .map(|_| (0..n_r * maps).map(|_| sample_cn(rng)).collect())
        .collect();
    ChannelSet::from_columns(n_r, per_user)
}

/// `y = sum_k H_k x_k + n` with `n ~ CN(0, sigma^2 I)`.
///
/// Always consumes `2 N_r` normal draws, including when `sigma^2 = 0`, so a
/// frame's stream stays aligned across noise levels.
pub fn transmit<R: Rng + ?Sized>(
    channels: &ChannelSet,
    config: &MbmConfig,
    symbols: &[MbmSymbol],
    noise: NoiseModel,
    rng: &mut R,
) -> Result<Vec<Complex64>> {
    channels.check_matches(config)?;
    if symbols.len() != config.users() {
        return Err(MbmError::Dimension(format!(
            "expected {} symbols, got {}",
            config.users(),
            symbols.len()
        )));
    }
    if symbols.iter().any(MbmSymbol::is_zero) {
        return Err(MbmError::ZeroSymbol);
    }
    let mut y = channels.superpose(config, symbols);
    let sigma = noise.sigma2().sqrt();
    for yi in y.iter_mut() {
        *yi += sample_cn(rng) * sigma;
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constellation::Constellation;
    use crate::rng::frame_stream;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn entry_statistics() {
        let config = MbmConfig::new(1000, 10, 7, Constellation::qam4()).unwrap();
        let mut rng = frame_stream(11, 0);
        let ch = generate_channel(&mut rng, &config).unwrap();
        let entries: Vec<Complex64> = ch
            .users()
            .iter()
            .flat_map(|u| (0..u.maps()).flat_map(move |m| u.column(m).to_vec()))
            .collect();
        let n = entries.len() as f64;
        assert!(n >= 1e6);
        let mean: Complex64 = entries.iter().sum::<Complex64>() / n;
        assert!(mean.re.abs() < 0.01 && mean.im.abs() < 0.01);
        let p: f64 = entries.iter().map(|v| v.norm_sqr()).sum::<f64>() / n;
        assert!((p - 1.0).abs() < 0.02);
        let re_var: f64 = entries.iter().map(|v| v.re * v.re).sum::<f64>() / n;
        assert!((re_var - 0.5).abs() < 0.01);
    }

    #[test]
    fn deterministic_generation() {
        let config = MbmConfig::new(16, 3, 2, Constellation::qam4()).unwrap();
        let a = generate_channel(&mut frame_stream(5, 9), &config).unwrap();
        let b = generate_channel(&mut frame_stream(5, 9), &config).unwrap();
        let c = generate_channel(&mut frame_stream(5, 10), &config).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn pinv_unit_diagonal() {
        let config = MbmConfig::new(8, 2, 2, Constellation::qam4()).unwrap();
        let ch = generate_channel(&mut frame_stream(1, 1), &config).unwrap();
        for u in ch.users() {
            for m in 0..u.maps() {
                let d: Complex64 = u
                    .pinv_row(m)
                    .iter()
                    .zip(u.column(m))
                    .map(|(w, h)| w * h)
                    .sum();
                assert!((d - c(1.0, 0.0)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn pinv_of_scaled_orthonormal_columns_is_exact() {
        // Columns 3*e0 and 3j*e2 in C^4.
        let cols = vec![
            c(3.0, 0.0),
            c(0.0, 0.0),
            c(0.0, 0.0),
            c(0.0, 0.0),
            c(0.0, 0.0),
            c(0.0, 0.0),
            c(0.0, 3.0),
            c(0.0, 0.0),
        ];
        let w = gram_diag_inverse(&cols, 4).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let v: Complex64 = (0..4).map(|r| w[i * 4 + r] * cols[j * 4 + r]).sum();
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((v - c(e, 0.0)).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn zero_column_is_degenerate() {
        let cols = vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)];
        assert_eq!(
            ChannelSet::from_columns(2, vec![cols]),
            Err(MbmError::DegenerateChannel { user: 0, map: 1 })
        );
    }

    #[test]
    fn noiseless_single_user() {
        let config = MbmConfig::new(6, 1, 2, Constellation::qam4()).unwrap();
        let ch = generate_channel(&mut frame_stream(2, 0), &config).unwrap();
        let sym = MbmSymbol::new(2, 1);
        let y = transmit(
            &ch,
            &config,
            &[sym],
            NoiseModel::noiseless(),
            &mut frame_stream(2, 1),
        )
        .unwrap();
        let q = config.symbol_value(sym);
        for (yi, hi) in y.iter().zip(ch.user(0).column(2)) {
            assert_eq!(*yi, q * hi);
        }
        assert_eq!(
            transmit(
                &ch,
                &config,
                &[MbmSymbol::Zero],
                NoiseModel::noiseless(),
                &mut frame_stream(2, 1)
            ),
            Err(MbmError::ZeroSymbol)
        );
    }

    #[test]
    fn received_power_is_users_times_antennas() {
        let config = MbmConfig::new(16, 4, 2, Constellation::qam16()).unwrap();
        let trials = 10_000;
        let mut total = 0.0;
        for t in 0..trials {
            let mut rng = frame_stream(3, t);
            let ch = generate_channel(&mut rng, &config).unwrap();
            let syms: Vec<MbmSymbol> = (0..4)
                .map(|_| MbmSymbol::new(rng.random_range(0..4), rng.random_range(0..16)))
                .collect();
            let y = transmit(&ch, &config, &syms, NoiseModel::noiseless(), &mut rng).unwrap();
            total += y.iter().map(|v| v.norm_sqr()).sum::<f64>();
        }
        let mean = total / trials as f64;
        let expect = (4 * 16) as f64;
        assert!((mean - expect).abs() / expect < 0.03, "{mean}");
    }

    #[test]
    fn hardening_metric_examples() {
        let cols = vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 1.0)];
        let ch = ChannelSet::from_columns(2, vec![cols]).unwrap();
        assert_eq!(ch.hardening_metric(), 0.0);

        let config = MbmConfig::new(1024, 4, 1, Constellation::qam4()).unwrap();
        let ch = generate_channel(&mut frame_stream(17, 0), &config).unwrap();
        let m = ch.hardening_metric();
        assert!(m < 0.2, "{m}");
        let mut users = ch.users().to_vec();
        users.reverse();
        let swapped = ChannelSet::new(users).unwrap();
        assert!((swapped.hardening_metric() - m).abs() < 1e-15);
    }

    #[test]
    fn dump_roundtrip_and_rejection() {
        let config = MbmConfig::new(5, 2, 2, Constellation::qam4()).unwrap();
        let ch = generate_channel(&mut frame_stream(4, 4), &config).unwrap();
        let bytes = ch.to_bytes();
        assert_eq!(bytes.len(), 20 + 16 * 5 * 4 * 2);
        assert_eq!(ChannelSet::from_bytes(&bytes).unwrap(), ch);
        assert!(ChannelSet::from_bytes(&bytes[..bytes.len() - 1]).is_err());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(ChannelSet::from_bytes(&bad).is_err());
        let mut bad = bytes;
        bad[12] = 3; // maps = 3
        assert!(ChannelSet::from_bytes(&bad).is_err());
    }
}
