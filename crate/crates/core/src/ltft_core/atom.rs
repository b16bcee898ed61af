use std::f64::consts::PI;

use num_complex::Complex64;

use super::{Grid, LtftParams};
use crate::error::{invalid, Result};

/// Frequency band of an atom: STFT below `b0`, wavelet on `[b0, b1)`, STFT
/// from `b1` up.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Band {
    Low,
    Wavelet,
    High,
}

impl LtftParams {
    pub fn band(&self, b: f64) -> Band {
        if b < self.b0 {
            Band::Low
        } else if b < self.b1 {
            Band::Wavelet
        } else {
            Band::High
        }
    }

    /// Dilation `beta` and modulation frequency of the atom at `(b, c)`. The
    /// atom is `sqrt(beta/gamma) e^{2 pi i nu (x-a)} f(beta/gamma (x-a))`.
    pub fn scale_and_centre(&self, b: f64, c: f64) -> (f64, f64) {
        let k = self.xi / self.gamma * c;
        match self.band(b) {
            Band::Low => (self.b0, k * self.b0 + b),
            Band::Wavelet => (b, (k + 1.0) * b),
            Band::High => (self.b1, k * self.b1 + b),
        }
    }
}

/// Time support of the atoms at frequency `b`.
pub fn atom_support_length(params: &LtftParams, b: f64) -> Result<f64> {
    if !(b >= 0.0) {
        return invalid(format!("frequency {b} < 0"));
    }
    let beta = if b <= params.b0 {
        params.b0
    } else if b < params.b1 {
        b
    } else {
        params.b1
    };
    Ok(params.gamma / beta)
}

/// Atom sampled on the grid indices `start..start + values.len()`.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseAtom {
    pub start: usize,
    pub values: Vec<Complex64>,
}

impl SparseAtom {
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `dt * sum |f|^2`.
    pub fn energy(&self, grid: &Grid) -> f64 {
        grid.dt() * self.values.iter().map(|z| z.norm_sqr()).sum::<f64>()
    }
}

/// Grid indices `lo..=hi` covering the support of the atom centred at `a`
/// with frequency `b`, or `None` when it misses the grid.
pub(crate) fn support_indices(params: &LtftParams, a: f64, b: f64, grid: &Grid) -> Option<(usize, usize)> {
    let (beta, _) = params.scale_and_centre(b, 0.0);
    let half_support = 0.5 * params.gamma / beta;
    let l = grid.rate;
    let mid = (grid.len / 2) as f64;
    let lo = (a * l - half_support * l + mid).ceil().max(0.0);
    let hi = (a * l + half_support * l + mid).floor().min(grid.len as f64 - 1.0);
    (lo <= hi).then_some((lo as usize, hi as usize))
}

/// Calls `visit(j, f_{a,b,c}(t_j))` for every grid index inside the support.
#[inline]
pub(crate) fn for_each_sample(
    params: &LtftParams,
    a: f64,
    b: f64,
    c: f64,
    grid: &Grid,
    mut visit: impl FnMut(usize, Complex64),
) {
    let Some((lo, hi)) = support_indices(params, a, b, grid) else {
        return;
    };
    let (beta, nu) = params.scale_and_centre(b, c);
    let scale = beta / params.gamma;
    let amp = scale.sqrt();
    let l = grid.rate;
    let mid = (grid.len / 2) as f64;
    // Offsets are kept in sample units so grid-aligned shifts stay exact.
    let centre = a * l;
    for j in lo..=hi {
        let x = ((j as f64 - mid) - centre) / l;
        let w = params.window.eval(scale * x);
        if w == 0.0 {
            continue;
        }
        visit(j, Complex64::from_polar(amp * w, 2.0 * PI * nu * x));
    }
}

pub fn ltft_atom_time(params: &LtftParams, a: f64, b: f64, c: f64, grid: &Grid) -> SparseAtom {
    let mut start = None;
    let mut values = Vec::new();
    for_each_sample(params, a, b, c, grid, |j, v| {
        let s = *start.get_or_insert(j);
        // Interior zeros of the window cannot occur, but keep indices dense.
        while s + values.len() < j {
            values.push(Complex64::new(0.0, 0.0));
        }
        values.push(v);
    });
    SparseAtom { start: start.unwrap_or(0), values }
}

/// Spectrum of the atom at `a = 0`: `sqrt(gamma/beta) f^(gamma/beta (omega - nu))`.
pub fn ltft_atom_freq(params: &LtftParams, b: f64, c: f64, freqs: &[f64]) -> Result<Vec<Complex64>> {
    if !(b >= 0.0) {
        return invalid(format!("frequency {b} < 0"));
    }
    let (beta, nu) = params.scale_and_centre(b, c);
    let s = params.gamma / beta;
    let amp = s.sqrt();
    Ok(freqs
        .iter()
        .map(|&w| Complex64::new(amp * params.window.spectrum(s * (w - nu)), 0.0))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup(l: f64, m: usize) -> (LtftParams, Grid) {
        (LtftParams::defaults(l).unwrap(), Grid::new(m, l).unwrap())
    }

    #[test]
    fn support_length_cases() {
        let (p, _) = setup(100.0, 8);
        assert_eq!(atom_support_length(&p, p.b0 / 2.0).unwrap(), p.s0());
        assert_eq!(atom_support_length(&p, p.b1).unwrap(), p.s1());
        assert_eq!(atom_support_length(&p, 25.0).unwrap(), p.gamma / 25.0);
        let below = atom_support_length(&p, p.b0 * (1.0 - 1e-12)).unwrap();
        let above = atom_support_length(&p, p.b0 * (1.0 + 1e-12)).unwrap();
        assert!((below - p.s0()).abs() < 1e-9 && (above - p.s0()).abs() < 1e-9);
        assert!(atom_support_length(&p, -1.0).is_err());
    }

    #[test]
    fn sampled_norm_close_to_one() {
        let (p, g) = setup(640.0, 4096);
        for &b in &[10.0, 64.0, 100.0, 200.0, 256.0, 320.0] {
            for &c in &[0.0, 0.5, 1.0] {
                let e = ltft_atom_time(&p, 0.013, b, c, &g).energy(&g);
                assert!((e.sqrt() - 1.0).abs() < 0.02, "b={b} c={c} norm={}", e.sqrt());
            }
        }
    }

    #[test]
    fn wavelet_atom_has_gamma_oscillations_at_c0() {
        let (p, g) = setup(1000.0, 4096);
        let b = 250.0;
        let atom = ltft_atom_time(&p, 0.0, b, 0.0, &g);
        let mut turns = 0.0;
        for w in atom.values.windows(2) {
            turns += (w[1] * w[0].conj()).arg() / (2.0 * PI);
        }
        let span = (atom.values.len() - 1) as f64 / g.rate;
        let support = atom_support_length(&p, b).unwrap();
        assert!((turns / span * support - p.gamma).abs() < 1e-9, "{turns}");
    }

    #[test]
    fn grid_aligned_shift_is_a_delay() {
        let (p, g) = setup(64.0, 1024);
        let base = ltft_atom_time(&p, 0.25, 17.0, 0.375, &g);
        let shifted = ltft_atom_time(&p, 0.25 + 5.0 / 64.0, 17.0, 0.375, &g);
        assert_eq!(shifted.start, base.start + 5);
        assert_eq!(shifted.values, base.values);
    }

    #[test]
    fn atom_outside_grid_is_empty() {
        let (p, g) = setup(64.0, 64);
        assert!(ltft_atom_time(&p, 100.0, 20.0, 0.0, &g).is_empty());
    }

    #[test]
    fn spectrum_peak_and_parseval() {
        let (p, g) = setup(256.0, 1024);
        let (b, c) = (60.0, 0.5);
        let freqs: Vec<f64> = (0..4096).map(|k| k as f64 * 0.0625).collect();
        let spec = ltft_atom_freq(&p, b, c, &freqs).unwrap();
        let peak = (0..freqs.len()).max_by(|&i, &j| spec[i].norm().total_cmp(&spec[j].norm())).unwrap();
        let centre = (p.xi / p.gamma * c + 1.0) * b;
        assert!((freqs[peak] - centre).abs() <= 0.0625);

        let freq_energy: f64 = spec.iter().map(|z| z.norm_sqr()).sum::<f64>() * 0.0625;
        let time_energy = ltft_atom_time(&p, 0.0, b, c, &g).energy(&g);
        assert!((freq_energy / time_energy - 1.0).abs() < 0.01);

        let far = ltft_atom_freq(&p, 250.0, 1.0, &[0.0]).unwrap();
        let (beta, nu) = p.scale_and_centre(250.0, 1.0);
        let s = p.gamma / beta;
        let exact = s.sqrt() * p.window.spectrum_exact(-s * nu);
        assert!((far[0].re - exact).abs() < 1e-9 * s.sqrt() && exact.abs() < 1e-5);
    }

    #[test]
    fn branches_meet_at_transitions() {
        let (p, _) = setup(100.0, 8);
        for &edge in &[p.b0, p.b1] {
            let (s_lo, n_lo) = p.scale_and_centre(edge * (1.0 - 1e-12), 0.7);
            let (s_hi, n_hi) = p.scale_and_centre(edge, 0.7);
            assert!((s_lo - s_hi).abs() < 1e-9 && (n_lo - n_hi).abs() < 1e-9);
        }
    }
}
