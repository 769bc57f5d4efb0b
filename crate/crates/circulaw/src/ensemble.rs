//! Matrix ensembles: counter-based sampling, entry distributions, cumulant
//! tables, and the Ornstein-Uhlenbeck interpolation toward Gaussian.
//!
//! Reproducibility contract: a sample is a pure function of
//! (n, field, distribution, seed, stream). Entries are drawn row-major from a
//! Philox2x64-10 stream keyed by the mixed seed, with the stream id in the
//! counter, so distinct streams never overlap and samples can be generated
//! in parallel in any order without changing a single bit.

use crate::spectral::CMat;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

const SQRT_HALF: f64 = std::f64::consts::FRAC_1_SQRT_2;

#[derive(Debug)]
pub enum EnsembleError {
    InvalidDimension { n: usize },
    UnknownField(String),
    UnknownDistribution(String),
    FieldMismatch,
    NotGaussian,
    DimensionMismatch { expected: usize, got: usize },
    InvalidTime { t: f64 },
    CumulantOrder { order: u32 },
}

impl std::fmt::Display for EnsembleError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            EnsembleError::InvalidDimension { n } => write!(f, "matrix dimension {n} must be >= 1"),
            EnsembleError::UnknownField(s) => write!(f, "unknown field {s:?} (real, complex)"),
            EnsembleError::UnknownDistribution(s) => write!(
                f,
                "unknown distribution {s:?} (gaussian, uniform, laplace, bernoulli, exponential_centered)"
            ),
            EnsembleError::FieldMismatch => write!(f, "samples live over different fields"),
            EnsembleError::NotGaussian => {
                write!(f, "interpolation target must be a gaussian sample")
            }
            EnsembleError::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            EnsembleError::InvalidTime { t } => write!(f, "flow time {t} must be >= 0"),
            EnsembleError::CumulantOrder { order } => {
                write!(f, "cumulant order {order} outside tabulated range 1..=6")
            }
        }
    }
}

impl std::error::Error for EnsembleError {}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Field {
    Real,
    Complex,
}

impl Field {
    pub fn parse(s: &str) -> Result<Self, EnsembleError> {
        match s {
            "real" => Ok(Field::Real),
            "complex" => Ok(Field::Complex),
            other => Err(EnsembleError::UnknownField(other.to_string())),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Field::Real => "real",
            Field::Complex => "complex",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Distribution {
    Gaussian,
    Uniform,
    Laplace,
    Bernoulli,
    ExponentialCentered,
}

impl Distribution {
    pub fn parse(s: &str) -> Result<Self, EnsembleError> {
        match s {
            "gaussian" => Ok(Distribution::Gaussian),
            "uniform" => Ok(Distribution::Uniform),
            "laplace" => Ok(Distribution::Laplace),
            "bernoulli" => Ok(Distribution::Bernoulli),
            "exponential_centered" => Ok(Distribution::ExponentialCentered),
            other => Err(EnsembleError::UnknownDistribution(other.to_string())),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Distribution::Gaussian => "gaussian",
            Distribution::Uniform => "uniform",
            Distribution::Laplace => "laplace",
            Distribution::Bernoulli => "bernoulli",
            Distribution::ExponentialCentered => "exponential_centered",
        }
    }

    /// All entry laws here are symmetric about zero except the centered
    /// exponential, whose odd cumulants survive.
    pub fn is_symmetric(self) -> bool {
        !matches!(self, Distribution::ExponentialCentered)
    }
}

/// Philox2x64-10 block function. Counter is (index, stream id), the key is
/// the seed after a splitmix64 mix. Ten rounds, the published constants.
const PHILOX_M: u64 = 0xD2B74407B1CE6E93;
const PHILOX_W: u64 = 0x9E3779B97F4A7C15;

fn philox2x64(index: u64, stream: u64, key: u64) -> (u64, u64) {
    let mut x0 = index;
    let mut x1 = stream;
    let mut k = key;
    for _ in 0..10 {
        let prod = (PHILOX_M as u128) * (x0 as u128);
        let hi = (prod >> 64) as u64;
        let lo = prod as u64;
        x0 = hi ^ k ^ x1;
        x1 = lo;
        k = k.wrapping_add(PHILOX_W);
    }
    (x0, x1)
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E3779B97F4A7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// One independent random stream. Cheap to construct; state is four words.
pub struct RngStream {
    key: u64,
    stream: u64,
    index: u64,
    spare: Option<u64>,
    spare_normal: Option<f64>,
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        RngStream { key: splitmix64(seed), stream, index: 0, spare: None, spare_normal: None }
    }

    pub fn next_u64(&mut self) -> u64 {
        if let Some(v) = self.spare.take() {
            return v;
        }
        let (a, b) = philox2x64(self.index, self.stream, self.key);
        self.index += 1;
        self.spare = Some(b);
        a
    }

    /// Uniform on [0, 1), 53-bit resolution.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on (0, 1]; safe under log.
    pub fn next_open01(&mut self) -> f64 {
        ((self.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal via Box-Muller; the paired draw is cached.
    pub fn next_normal(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        let u1 = self.next_open01();
        let u2 = self.next_f64();
        let r = (-2.0 * u1.ln()).sqrt();
        let th = 2.0 * std::f64::consts::PI * u2;
        self.spare_normal = Some(r * th.sin());
        r * th.cos()
    }

    /// Mean zero, variance one draw from the requested law.
    pub fn draw_real(&mut self, dist: Distribution) -> f64 {
        match dist {
            Distribution::Gaussian => self.next_normal(),
            Distribution::Uniform => (self.next_f64() - 0.5) * (2.0 * 3f64.sqrt()),
            Distribution::Laplace => {
                // difference of two unit exponentials, scaled to unit variance
                let u1 = self.next_open01();
                let u2 = self.next_open01();
                SQRT_HALF * (u2 / u1).ln()
            }
            Distribution::Bernoulli => {
                if self.next_u64() >> 63 == 1 {
                    1.0
                } else {
                    -1.0
                }
            }
            Distribution::ExponentialCentered => -self.next_open01().ln() - 1.0,
        }
    }

    /// Entry draw: real laws untouched, complex ones as (a + ib)/sqrt(2)
    /// with a, b independent copies, so E|chi|^2 = 1 either way.
    pub fn draw_entry(&mut self, field: Field, dist: Distribution) -> Complex64 {
        match field {
            Field::Real => Complex64::new(self.draw_real(dist), 0.0),
            Field::Complex => {
                let a = self.draw_real(dist);
                let b = self.draw_real(dist);
                Complex64::new(a * SQRT_HALF, b * SQRT_HALF)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub n: usize,
    pub field: Field,
    pub dist: Distribution,
    pub seed: u64,
}

impl EnsembleSpec {
    pub fn validate(&self) -> Result<(), EnsembleError> {
        if self.n == 0 {
            return Err(EnsembleError::InvalidDimension { n: self.n });
        }
        Ok(())
    }
}

/// One drawn matrix, entries already scaled by n^{-1/2}.
#[derive(Clone, Debug)]
pub struct MatrixSample {
    pub spec: EnsembleSpec,
    pub stream: u64,
    pub entries: CMat,
}

impl MatrixSample {
    pub fn n(&self) -> usize {
        self.spec.n
    }

    pub fn field(&self) -> Field {
        self.spec.field
    }
}

/// Draw X with i.i.d. entries chi_ij / sqrt(n), row-major draw order.
pub fn sample_iid(spec: &EnsembleSpec, stream: u64) -> Result<MatrixSample, EnsembleError> {
    spec.validate()?;
    let n = spec.n;
    let mut rng = RngStream::new(spec.seed, stream);
    let scale = 1.0 / (n as f64).sqrt();
    let mut entries = CMat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let chi = rng.draw_entry(spec.field, spec.dist);
            entries.set(i, j, chi * scale);
        }
    }
    Ok(MatrixSample { spec: spec.clone(), stream, entries })
}

/// Gaussian convenience constructor.
pub fn sample_ginibre(
    n: usize,
    field: Field,
    seed: u64,
    stream: u64,
) -> Result<MatrixSample, EnsembleError> {
    sample_iid(&EnsembleSpec { n, field, dist: Distribution::Gaussian, seed }, stream)
}

/// A point on the interpolation X_t = e^{-t/2} X_0 + sqrt(1 - e^{-t}) X_G.
#[derive(Clone, Debug)]
pub struct FlowPoint {
    pub t: f64,
    pub sample: MatrixSample,
}

/// Ornstein-Uhlenbeck blend of a starting sample toward an independent
/// Gaussian one. Entry variance is preserved exactly for every t. The
/// endpoints t = 0 and t = +inf return bit-exact copies of x0 and xg; the
/// returned sample keeps the spec and stream of the t = 0 endpoint.
pub fn interpolate_ou(
    x0: &MatrixSample,
    xg: &MatrixSample,
    t: f64,
) -> Result<FlowPoint, EnsembleError> {
    if xg.spec.dist != Distribution::Gaussian {
        return Err(EnsembleError::NotGaussian);
    }
    if x0.n() != xg.n() {
        return Err(EnsembleError::DimensionMismatch { expected: x0.n(), got: xg.n() });
    }
    if x0.field() != xg.field() {
        return Err(EnsembleError::FieldMismatch);
    }
    if t.is_nan() || t < 0.0 {
        return Err(EnsembleError::InvalidTime { t });
    }
    if t == 0.0 {
        return Ok(FlowPoint { t, sample: x0.clone() });
    }
    if t.is_infinite() {
        return Ok(FlowPoint { t, sample: xg.clone() });
    }
    let n = x0.n();
    let c0 = (-t / 2.0).exp();
    let cg = (1.0 - (-t).exp()).sqrt();
    let mut entries = CMat::zeros(n, n);
    for i in 0..n {
        let (ar, ai) = x0.entries.row(i);
        let (gr, gi) = xg.entries.row(i);
        let (er, ei) = entries.row_mut(i);
        for j in 0..n {
            er[j] = c0 * ar[j] + cg * gr[j];
            ei[j] = c0 * ai[j] + cg * gi[j];
        }
    }
    Ok(FlowPoint { t, sample: MatrixSample { spec: x0.spec.clone(), stream: x0.stream, entries } })
}

/// Cumulants kappa_m of the unit-variance real entry laws, 1 <= m <= 6.
fn base_kappa(dist: Distribution, m: u32) -> f64 {
    match dist {
        Distribution::Gaussian => {
            if m == 2 {
                1.0
            } else {
                0.0
            }
        }
        Distribution::Uniform => match m {
            2 => 1.0,
            4 => -6.0 / 5.0,
            6 => 48.0 / 7.0,
            _ => 0.0,
        },
        Distribution::Laplace => match m {
            2 => 1.0,
            4 => 3.0,
            6 => 30.0,
            _ => 0.0,
        },
        Distribution::Bernoulli => match m {
            2 => 1.0,
            4 => -2.0,
            6 => 16.0,
            _ => 0.0,
        },
        // exp(1) - 1: kappa_1 killed by the centering, kappa_m = (m-1)! above
        Distribution::ExponentialCentered => match m {
            1 => 0.0,
            m => (1..m).map(|k| k as f64).product(),
        },
    }
}

fn kappa_ij(field: Field, dist: Distribution, i: u32, j: u32) -> Complex64 {
    let m = i + j;
    let k = base_kappa(dist, m);
    match field {
        Field::Real => Complex64::new(k, 0.0),
        Field::Complex => {
            // chi = (a + ib)/sqrt(2): the mixed cumulant collapses to the
            // all-a and all-b terms, giving 2^{-m/2} kappa_m (1 + i^{i-j})
            let unit = match (4 + (i as i64 - j as i64).rem_euclid(4)) % 4 {
                0 => Complex64::new(2.0, 0.0),
                1 => Complex64::new(1.0, 1.0),
                2 => Complex64::new(0.0, 0.0),
                _ => Complex64::new(1.0, -1.0),
            };
            unit * k * 2f64.powf(-(m as f64) / 2.0)
        }
    }
}

/// Joint cumulant kappa_{i,j}(chi_t, conj(chi_t)) of the flowed entry law at
/// time t, for 1 <= i + j <= 6. At t = 0 this is the base table; under the
/// flow every order m decays as e^{-mt/2} while the Gaussian second order
/// fills in, so kappa_{1,1} stays exactly 1 for all t.
pub fn theoretical_cumulant(
    field: Field,
    dist: Distribution,
    i: u32,
    j: u32,
    t: f64,
) -> Result<Complex64, EnsembleError> {
    let m = i + j;
    if m == 0 || m > 6 {
        return Err(EnsembleError::CumulantOrder { order: m });
    }
    if t.is_nan() || t < 0.0 {
        return Err(EnsembleError::InvalidTime { t });
    }
    let base = kappa_ij(field, dist, i, j);
    let gauss = kappa_ij(field, Distribution::Gaussian, i, j);
    let decay = (-(m as f64) * t / 2.0).exp();
    let fill = 1.0 - (-t).exp();
    Ok(base * decay + gauss * fill)
}
