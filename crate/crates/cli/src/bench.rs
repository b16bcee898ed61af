//! Benchmark workloads shared by the CLI and the acceptance suite.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qmc_ltft::ltft_core::{atom_support_length, DigitalSignal, Grid, LtftParams, SampleSet};
use qmc_ltft::processing::{edge_taper, relative_error, Reconstructor, SequenceKind};
use qmc_ltft::Result;

/// Complex test signal: eight log-spaced tones in `[2 b0, b1]`, two
/// Gaussian chirps sweeping across the wavelet band in opposite directions
/// and a weak noise floor, tapered to zero within `s0` of the ends.
pub fn default_test_signal(params: &LtftParams, grid: Grid, seed: u64) -> Result<DigitalSignal> {
    let (b0, b1) = (params.b0, params.b1);
    let dur = grid.duration();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tones: Vec<f64> = (0..8).map(|i| 2.0 * b0 * (b1 / (2.0 * b0)).powf(i as f64 / 7.0)).collect();
    let chirps = [(-dur / 4.0, 1.2 * b0, 0.9 * b1), (dur / 4.0, 0.9 * b1, 1.2 * b0)];
    let sigma = dur / 12.0;
    let taper = edge_taper(&grid, params.s0(), params.s0());
    let samples = (0..grid.len)
        .map(|j| {
            let t = grid.time(j);
            let mut z: Complex64 = tones
                .iter()
                .enumerate()
                .map(|(i, &f)| Complex64::from_polar(1.0 / 8.0, 2.0 * PI * f * t + i as f64))
                .sum();
            for &(tc, f0, f1) in &chirps {
                let u = t - tc;
                let rate = (f1 - f0) / (6.0 * sigma);
                let env = 0.5 * (-u * u / (2.0 * sigma * sigma)).exp();
                z += Complex64::from_polar(env, 2.0 * PI * (0.5 * (f0 + f1) * u + 0.5 * rate * u * u));
            }
            let g: f64 = (0..12).map(|_| rng.gen::<f64>()).sum::<f64>() - 6.0;
            (z + 3e-4 * g) * taper[j]
        })
        .collect();
    DigitalSignal::new(samples, grid.rate)
}

/// Sampling method of the reconstruction benchmark.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Hammersley,
    Halton,
    /// Mean over seeds `0..seeds`.
    Mc,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Hammersley => "hammersley",
            Method::Halton => "halton",
            Method::Mc => "mc",
        })
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "hammersley" => Ok(Method::Hammersley),
            "halton" => Ok(Method::Halton),
            "mc" => Ok(Method::Mc),
            _ => Err(format!("unknown method '{s}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorRow {
    pub method: Method,
    pub redundancy: f64,
    pub n: usize,
    pub error: f64,
    /// Sample standard deviation across seeds; zero for deterministic sets.
    pub std: f64,
}

/// Relative L2 reconstruction error of `signal` at `N = ceil(A M)` samples.
pub fn bench_reconstruction(
    signal: &DigitalSignal,
    params: &LtftParams,
    methods: &[Method],
    redundancies: &[f64],
    seeds: u64,
) -> Result<Vec<ErrorRow>> {
    let m = signal.len();
    let mut rows = Vec::new();
    for &method in methods {
        for &a in redundancies {
            let n = (a * m as f64).ceil() as usize;
            let kinds: Vec<SequenceKind> = match method {
                Method::Hammersley => vec![SequenceKind::Hammersley],
                Method::Halton => vec![SequenceKind::Halton],
                Method::Mc => (0..seeds.max(1)).map(SequenceKind::Mc).collect(),
            };
            let errs = kinds
                .into_iter()
                .map(|k| {
                    let rec = Reconstructor::new(params, signal.grid, k, n)?;
                    Ok(relative_error(&rec.reconstruct(signal)?, signal))
                })
                .collect::<Result<Vec<f64>>>()?;
            let mean = errs.iter().sum::<f64>() / errs.len() as f64;
            let std = if errs.len() > 1 {
                (errs.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (errs.len() - 1) as f64).sqrt()
            } else {
                0.0
            };
            rows.push(ErrorRow { method, redundancy: a, n, error: mean, std });
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexityCount {
    pub n: usize,
    /// Grid samples touched by synthesis, `sum_n round(L S(b_n))`.
    pub actual: usize,
    /// `γ N (1 + ln(b1/b0) + (L - b1)/b1)`, the count for frequencies
    /// uniform on `[0, L]`.
    pub predicted: f64,
}

pub fn complexity_count(samples: &SampleSet, params: &LtftParams, l: f64) -> Result<ComplexityCount> {
    let mut actual = 0usize;
    for &[_, b, _] in &samples.points {
        actual += (l * atom_support_length(params, b)?).round() as usize;
    }
    let n = samples.len();
    let (b0, b1) = (params.b0, params.b1);
    let predicted = params.gamma * n as f64 * (1.0 + (b1 / b0).ln() + (l - b1) / b1);
    Ok(ComplexityCount { n, actual, predicted })
}
