//! Simulated identification experiment: sample `Ξ(iω)` with noise, fit a
//! rational function, and hand it to the reconstruction routines.
//!
//! Noise model: additive i.i.d. complex Gaussian on each transfer-function
//! entry, standard deviation `noise_sigma` per real component. Frequency `j`
//! draws from `ChaCha8Rng::seed_from_u64(seed)` on stream `j`, so datasets are
//! bit-identical regardless of thread count.

use std::fmt::Write as _;
use std::str::FromStr;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::json::{matrix_to_rows, rows_to_matrix, Cx};
use crate::linalg::{self, re, CMat, I};
use crate::model::PassiveSystem;
use crate::par::{self, Execution};
use crate::poly::Poly;
use crate::realization::{
    companion_realization, direct_reconstruction, reconstruct_passive, CanonicalParams, RationalTF,
    ReconstructOptions, PASSIVITY_REL_TOL,
};

pub const MAX_FIT_ITERATIONS: usize = 20;
pub const FIT_REL_CHANGE: f64 = 1e-10;
/// Largest accepted condition number of the normal equations.
pub const MAX_NORMAL_CONDITION: f64 = 1e12;
/// Passivity tolerance added per unit of fit RMS residual in [`identify_pipeline`].
pub const NOISE_TOL_FACTOR: f64 = 1e3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DatasetFile", into = "DatasetFile")]
pub struct ProbeDataset {
    pub freqs: Vec<f64>,
    pub responses: Vec<CMat>,
    pub noise_sigma: f64,
    pub seed: u64,
}

/// On-disk layout: `{"freqs", "responses": [[[c]]], "noise_sigma", "seed"}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetFile {
    pub freqs: Vec<f64>,
    pub responses: Vec<Vec<Vec<Cx>>>,
    pub noise_sigma: f64,
    pub seed: u64,
}

impl TryFrom<DatasetFile> for ProbeDataset {
    type Error = Error;
    fn try_from(f: DatasetFile) -> Result<Self> {
        let responses = f
            .responses
            .iter()
            .map(|rows| rows_to_matrix(rows, rows.len()))
            .collect::<Result<Vec<_>>>()?;
        ProbeDataset::new(f.freqs, responses, f.noise_sigma, f.seed)
    }
}

impl From<ProbeDataset> for DatasetFile {
    fn from(d: ProbeDataset) -> Self {
        DatasetFile {
            freqs: d.freqs,
            responses: d.responses.iter().map(matrix_to_rows).collect(),
            noise_sigma: d.noise_sigma,
            seed: d.seed,
        }
    }
}

fn check_freqs(freqs: &[f64]) -> Result<()> {
    if freqs.iter().any(|w| !w.is_finite()) {
        return Err(Error::InvalidInput("non-finite frequency".into()));
    }
    if let Some(k) = freqs.windows(2).position(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidInput(format!("frequencies not strictly increasing at index {}", k + 1)));
    }
    Ok(())
}

impl ProbeDataset {
    pub fn new(freqs: Vec<f64>, responses: Vec<CMat>, noise_sigma: f64, seed: u64) -> Result<Self> {
        check_freqs(&freqs)?;
        if responses.len() != freqs.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} frequencies but {} responses",
                freqs.len(),
                responses.len()
            )));
        }
        if let Some(first) = responses.first() {
            let shape = first.shape();
            if shape.0 != shape.1 || responses.iter().any(|r| r.shape() != shape) {
                return Err(Error::DimensionMismatch("responses must be equal square matrices".into()));
            }
        }
        Ok(ProbeDataset { freqs, responses, noise_sigma, seed })
    }

    pub fn ports(&self) -> usize {
        self.responses.first().map_or(0, |r| r.nrows())
    }

    /// CSV with header `omega,row,col,re,im,abs,arg`, one line per frequency and port pair.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("omega,row,col,re,im,abs,arg\n");
        for (w, r) in self.freqs.iter().zip(&self.responses) {
            for i in 0..r.nrows() {
                for j in 0..r.ncols() {
                    let z = r[(i, j)];
                    let _ = writeln!(out, "{w},{i},{j},{},{},{},{}", z.re, z.im, z.norm(), z.arg());
                }
            }
        }
        out
    }
}

/// Frequency grid spec `lo:hi:count:log|lin`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyGrid {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
    pub log: bool,
}

impl FrequencyGrid {
    pub fn log(lo: f64, hi: f64, count: usize) -> Self {
        FrequencyGrid { lo, hi, count, log: true }
    }

    pub fn points(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.lo];
        }
        let last = (self.count - 1) as f64;
        (0..self.count)
            .map(|k| {
                let t = k as f64 / last;
                if self.log {
                    (self.lo.ln() + t * (self.hi.ln() - self.lo.ln())).exp()
                } else {
                    self.lo + t * (self.hi - self.lo)
                }
            })
            .collect()
    }

    /// Default probe grid: 200 log-spaced points over `[0.01, 100] × scale`.
    pub fn default_for(sys: &PassiveSystem) -> Result<Self> {
        let scale = linalg::eigenvalues(&sys.drift_matrix().a)?
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        let scale = if scale > 0.0 { scale } else { 1.0 };
        Ok(FrequencyGrid::log(0.01 * scale, 100.0 * scale, 200))
    }
}

impl FromStr for FrequencyGrid {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidInput(format!("bad frequency grid '{s}', expected lo:hi:count:log|lin"));
        let parts: Vec<&str> = s.split(':').collect();
        let [lo, hi, count, kind] = parts.as_slice() else {
            return Err(bad());
        };
        let lo: f64 = lo.parse().map_err(|_| bad())?;
        let hi: f64 = hi.parse().map_err(|_| bad())?;
        let count: usize = count.parse().map_err(|_| bad())?;
        let log = match *kind {
            "log" => true,
            "lin" => false,
            _ => return Err(bad()),
        };
        if count == 0 || !(hi > lo) || (log && !(lo > 0.0)) {
            return Err(bad());
        }
        Ok(FrequencyGrid { lo, hi, count, log })
    }
}

pub fn sample_response(sys: &PassiveSystem, freqs: &[f64], noise_sigma: f64, seed: u64) -> Result<ProbeDataset> {
    sample_response_with(sys, freqs, noise_sigma, seed, Execution::default())
}

pub fn sample_response_with(
    sys: &PassiveSystem,
    freqs: &[f64],
    noise_sigma: f64,
    seed: u64,
    exec: Execution,
) -> Result<ProbeDataset> {
    if !(noise_sigma >= 0.0) || !noise_sigma.is_finite() {
        return Err(Error::InvalidInput("noise_sigma must be a finite nonnegative number".into()));
    }
    check_freqs(freqs)?;
    let abscissa = linalg::spectral_abscissa(&sys.drift_matrix().a)?;
    if !(abscissa < 0.0) {
        return Err(Error::NotStable { abscissa });
    }
    let points: Vec<Complex64> = freqs.iter().map(|&w| I * w).collect();
    let clean = sys.transfer_batch(&points, exec)?;
    let normal = Normal::new(0.0, noise_sigma).expect("sigma validated above");
    let m = sys.m();
    let responses = par::map_indexed(clean.len(), exec, |j| {
        if noise_sigma == 0.0 {
            return clean[j].clone();
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(j as u64);
        let mut r = clean[j].clone();
        for i in 0..m {
            for k in 0..m {
                let (a, b) = (normal.sample(&mut rng), normal.sample(&mut rng));
                r[(i, k)] += Complex64::new(a, b);
            }
        }
        r
    });
    ProbeDataset::new(freqs.to_vec(), responses, noise_sigma, seed)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub tf: RationalTF,
    pub rms_residual: f64,
    pub iterations: usize,
}

/// Fits `Ξ̂(iω) ≈ num/den` (num degree n, den monic degree n) by
/// Sanathanan–Koerner iteration: weighted linear least squares on
/// `num(iω) − Ξ̂·den(iω)`, reweighted by `1/|den_prev(iω)|`.
pub fn fit_rational(data: &ProbeDataset, degree: usize) -> Result<FitResult> {
    if data.ports() != 1 {
        return Err(Error::NotSiso);
    }
    let n = degree;
    if n == 0 {
        return Err(Error::InvalidInput("degree must be at least 1".into()));
    }
    let need = 2 * (2 * n + 1);
    if data.freqs.len() < need {
        return Err(Error::InsufficientData { have: data.freqs.len(), need });
    }
    // work in x = s/ω₀ to balance the monomial columns
    let nonzero: Vec<f64> = data.freqs.iter().map(|w| w.abs()).filter(|w| *w > 0.0).collect();
    let w0 = if nonzero.is_empty() {
        1.0
    } else {
        (nonzero.iter().map(|w| w.ln()).sum::<f64>() / nonzero.len() as f64).exp()
    };
    let xs: Vec<Complex64> = data.freqs.iter().map(|&w| I * (w / w0)).collect();
    let h: Vec<Complex64> = data.responses.iter().map(|r| r[(0, 0)]).collect();
    let rows = xs.len();
    let unknowns = 2 * n + 1;

    let mut den_x: Option<Poly> = None;
    let mut num_x = Poly::zero();
    let mut prev: Option<Vec<Complex64>> = None;
    let mut iterations = 0;
    for it in 1..=MAX_FIT_ITERATIONS {
        iterations = it;
        let mut design = CMat::zeros(rows, unknowns);
        let mut rhs = CMat::zeros(rows, 1);
        for (j, (&x, &hj)) in xs.iter().zip(&h).enumerate() {
            // first pass: Butterworth-like prior 1/√(1 + |x|^{2n}) in place of 1/|den|
            let w = match &den_x {
                Some(d) => 1.0 / d.eval(x).norm(),
                None => 1.0 / (1.0 + x.norm().powi(2 * n as i32)).sqrt(),
            };
            let mut xp = re(1.0);
            for k in 0..=n {
                design[(j, k)] = xp * w;
                if k < n {
                    design[(j, n + 1 + k)] = -hj * xp * w;
                }
                if k < n {
                    xp *= x;
                }
            }
            rhs[(j, 0)] = hj * xp * w;
        }
        let norms: Vec<f64> = (0..unknowns).map(|k| design.column(k).norm()).collect();
        if norms.iter().any(|&v| v == 0.0 || !v.is_finite()) {
            return Err(Error::IllConditioned { condition: f64::INFINITY });
        }
        for (k, v) in norms.iter().enumerate() {
            design.column_mut(k).scale_mut(1.0 / v);
        }
        let svd = design.clone().svd(true, true);
        let smax = svd.singular_values.max();
        let smin = svd.singular_values.min();
        let condition = (smax / smin).powi(2);
        if !(condition <= MAX_NORMAL_CONDITION) {
            return Err(Error::IllConditioned { condition });
        }
        let sol = svd
            .solve(&rhs, 0.0)
            .map_err(|e| Error::SolverSingular(e.to_string()))?;
        let coef: Vec<Complex64> = (0..unknowns).map(|k| sol[(k, 0)] / norms[k]).collect();
        num_x = Poly::new(coef[..=n].to_vec());
        let mut d = coef[n + 1..].to_vec();
        d.push(re(1.0));
        den_x = Some(Poly::new(d));
        let change = prev.as_ref().map(|p| {
            let diff = p.iter().zip(&coef).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            let size = coef.iter().map(|z| z.norm()).fold(0.0, f64::max);
            diff / size.max(f64::MIN_POSITIVE)
        });
        prev = Some(coef);
        if change.is_some_and(|c| c < FIT_REL_CHANGE) {
            break;
        }
    }
    // back to s: coefficient k picks up ω₀^{n−k}
    let unscale = |p: &Poly| Poly::new((0..=n).map(|k| p.coeff(k) * w0.powi((n - k) as i32)).collect());
    let den_x = den_x.expect("at least one iteration");
    let tf = RationalTF::siso(unscale(&num_x), unscale(&den_x))?;
    let sq: f64 = data
        .freqs
        .iter()
        .zip(&h)
        .map(|(&w, &hj)| (tf.eval(I * w)[(0, 0)] - hj).norm_sqr())
        .sum();
    let rms_residual = (sq / rows as f64).sqrt();
    Ok(FitResult { tf, rms_residual, iterations })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineOutput {
    pub system: PassiveSystem,
    pub canonical: CanonicalParams,
    pub fit: FitResult,
}

impl PipelineOutput {
    /// Spectrum of the reconstructed `Ω`, ascending.
    pub fn omega_eigenvalues(&self) -> Vec<f64> {
        linalg::hermitian_eigenvalues(self.system.omega())
    }
}

/// fit → classical reconstruction and direct reconstruction.
///
/// The passivity tolerance grows with the fit residual, since a noisy fit is
/// only approximately the transfer function of a passive system.
pub fn identify_pipeline(data: &ProbeDataset, degree: usize) -> Result<PipelineOutput> {
    let fit = fit_rational(data, degree)?;
    let scale = fit
        .tf
        .strictly_proper()
        .iter()
        .flatten()
        .flat_map(|p| p.coeffs.iter())
        .map(|z| z.norm())
        .fold(1.0, f64::max);
    let tol = PASSIVITY_REL_TOL * scale + NOISE_TOL_FACTOR * fit.rms_residual * scale;
    let opts = ReconstructOptions::with_tol(tol);
    let realization = companion_realization(&fit.tf)?;
    let (system, _) = reconstruct_passive(&realization, None, opts)?;
    let canonical = direct_reconstruction(&fit.tf, opts)?;
    Ok(PipelineOutput { system, canonical, fit })
}

/// Runs sample → identify for each seed; seeds are processed in parallel and
/// results come back in seed order.
pub fn pipeline_sweep(
    sys: &PassiveSystem,
    freqs: &[f64],
    noise_sigma: f64,
    seeds: &[u64],
    degree: usize,
    exec: Execution,
) -> Vec<Result<PipelineOutput>> {
    par::map_indexed(seeds.len(), exec, |k| {
        let data = sample_response_with(sys, freqs, noise_sigma, seeds[k], Execution::Sequential)?;
        identify_pipeline(&data, degree)
    })
}
