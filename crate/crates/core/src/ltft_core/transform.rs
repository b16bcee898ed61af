use num_complex::Complex64;
use rayon::prelude::*;

use super::atom::{for_each_sample, support_indices};
use super::{DigitalSignal, Grid, LtftParams, SampleSet};
use crate::error::{invalid, Result};

/// Coefficients aligned with a sample set, carrying the cubature weight.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientVector {
    pub values: Vec<Complex64>,
    pub weight: f64,
}

impl CoefficientVector {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// `V(g_n) = dt * sum_m s(t_m) conj(f_{g_n}(t_m))`, weight `mu / N`.
pub fn analyze(signal: &DigitalSignal, samples: &SampleSet, params: &LtftParams) -> Result<CoefficientVector> {
    let (f_lo, f_hi) = samples.bx.freq;
    if f_lo < 0.0 || f_hi > signal.rate() {
        return invalid("sample box frequency side must lie within [0, L]");
    }
    if samples.is_empty() {
        return invalid("empty sample set");
    }
    let grid = signal.grid;
    let dt = grid.dt();
    let s = &signal.samples;
    let values = samples
        .points
        .par_iter()
        .map(|&[a, b, c]| {
            let mut acc = Complex64::new(0.0, 0.0);
            for_each_sample(params, a, b, c, &grid, |j, f| acc += s[j] * f.conj());
            acc * dt
        })
        .collect();
    Ok(CoefficientVector { values, weight: samples.volume() / samples.len() as f64 })
}

/// Atoms per accumulation chunk. Chunks are fixed by `N` alone and merged in
/// index order, so the result does not depend on the thread count.
const CHUNKS: usize = 64;
const MIN_CHUNK: usize = 1024;

/// `weight * sum_n F_n f_{g_n}` on `grid`.
pub fn synthesize(
    coeffs: &CoefficientVector,
    samples: &SampleSet,
    params: &LtftParams,
    grid: Grid,
) -> Result<DigitalSignal> {
    if coeffs.len() != samples.len() {
        return invalid(format!("{} coefficients for {} samples", coeffs.len(), samples.len()));
    }
    let n = samples.len();
    let chunk = n.div_ceil(CHUNKS).max(MIN_CHUNK);
    let partials: Vec<(usize, Vec<Complex64>)> = samples
        .points
        .par_chunks(chunk)
        .zip(coeffs.values.par_chunks(chunk))
        .map(|(pts, vals)| {
            let ranges: Vec<Option<(usize, usize)>> =
                pts.iter().map(|&[a, b, _]| support_indices(params, a, b, &grid)).collect();
            let lo = ranges.iter().flatten().map(|r| r.0).min().unwrap_or(0);
            let hi = ranges.iter().flatten().map(|r| r.1 + 1).max().unwrap_or(0);
            let mut buf = vec![Complex64::new(0.0, 0.0); hi.saturating_sub(lo)];
            for (&[a, b, c], &v) in pts.iter().zip(vals) {
                for_each_sample(params, a, b, c, &grid, |j, f| buf[j - lo] += v * f);
            }
            (lo, buf)
        })
        .collect();
    let mut out = DigitalSignal::zeros(grid);
    for (lo, buf) in partials {
        for (k, v) in buf.into_iter().enumerate() {
            out.samples[lo + k] += v;
        }
    }
    for x in &mut out.samples {
        *x *= coeffs.weight;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ltft_core::{ltft_atom_time, Generator, PhaseSpaceBox};

    fn setup() -> (LtftParams, Grid, PhaseSpaceBox) {
        let l = 64.0;
        let m = 512;
        (LtftParams::defaults(l).unwrap(), Grid::new(m, l).unwrap(), PhaseSpaceBox::for_signal(m, l, 0.0).unwrap())
    }

    fn atom_signal(p: &LtftParams, g: &Grid, a: f64, b: f64, c: f64) -> DigitalSignal {
        let atom = ltft_atom_time(p, a, b, c, g);
        let mut s = DigitalSignal::zeros(*g);
        for (k, v) in atom.values.iter().enumerate() {
            s.samples[atom.start + k] = *v;
        }
        s
    }

    #[test]
    fn zero_signal_and_self_inner_product() {
        let (p, g, bx) = setup();
        let pts = vec![[0.5, 20.0, 0.3], [-1.0, 3.0, 0.9]];
        let set = SampleSet::new(pts, bx, Generator::External).unwrap();
        let zero = analyze(&DigitalSignal::zeros(g), &set, &p).unwrap();
        assert!(zero.values.iter().all(|z| z.norm() == 0.0));
        assert_eq!(zero.weight, bx.volume() / 2.0);

        let s = atom_signal(&p, &g, 0.5, 20.0, 0.3);
        let v = analyze(&s, &set, &p).unwrap();
        assert!((v.values[0].re - 1.0).abs() < 0.02 && v.values[0].im.abs() < 1e-12);
    }

    #[test]
    fn synthesis_of_a_single_atom() {
        let (p, g, bx) = setup();
        let set = SampleSet::new(vec![[0.25, 10.0, 0.5]], bx, Generator::External).unwrap();
        let coeffs = CoefficientVector { values: vec![Complex64::new(1.0, 0.0)], weight: bx.volume() };
        let out = synthesize(&coeffs, &set, &p, g).unwrap();
        let expect = atom_signal(&p, &g, 0.25, 10.0, 0.5);
        for (a, b) in out.samples.iter().zip(&expect.samples) {
            assert!((a - b * bx.volume()).norm() < 1e-12);
        }
        let zero = CoefficientVector { values: vec![Complex64::new(0.0, 0.0)], weight: 1.0 };
        assert!(synthesize(&zero, &set, &p, g).unwrap().samples.iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn synthesis_is_schedule_independent() {
        let (p, g, bx) = setup();
        let pts: Vec<[f64; 3]> = (0..5000)
            .map(|i| {
                let u = (i as f64 * 0.618_033_988_749_895).fract();
                let v = (i as f64 * 0.754_877_666_246_693).fract();
                let w = (i as f64 * 0.569_840_290_998_053).fract();
                [bx.time.0 + u * 8.0, v * 64.0, w]
            })
            .collect();
        let set = SampleSet::new(pts, bx, Generator::External).unwrap();
        let vals: Vec<Complex64> = (0..5000).map(|i| Complex64::new((i as f64).sin(), (i as f64).cos())).collect();
        let coeffs = CoefficientVector { values: vals, weight: 0.1 };
        let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let many = rayon::ThreadPoolBuilder::new().num_threads(7).build().unwrap();
        let a = single.install(|| synthesize(&coeffs, &set, &p, g).unwrap());
        let b = many.install(|| synthesize(&coeffs, &set, &p, g).unwrap());
        assert_eq!(a, b);
    }
}
