//! Diagonal of the sampled frame operator in frequency and its inverse.
//!
//! For atoms sampled at rate `L` the operator `S = V* V` over the box
//! `[t_lo, t_hi] x [0, L] x [0, 1]` acts on signals supported away from the
//! time edges as multiplication of the DFT by
//!
//! ```text
//! h(omega_k) = sum_p H(omega_k + p L),   H = Q0 + Q1 + Q2,
//! ```
//!
//! where `H(omega) = int_0^1 int_0^L |f^_{0,b,c}(omega)|^2 db dc` split by band.
//! The sum over `p` accounts for atom spectra that extend past `L` and alias
//! back onto the grid.
//!
//! With `W = |f^|^2`, `CW` its running integral and `CCW` the running
//! integral of `CW`, the short-time bands reduce to
//!
//! ```text
//! Q(omega) = (1/xi) [CCW(x_h) - CCW(x_h - xi) - CCW(x_l) + CCW(x_l - xi)],
//! x_h = gamma/beta (omega - b_lo),  x_l = gamma/beta (omega - b_hi),
//! ```
//!
//! and the wavelet band to `Q1(omega) = I(gamma omega / b0) - I(gamma omega / b1)`
//! with `I` the running integral of `P1(q) / q`,
//! `P1(q) = gamma/xi (CW(q - gamma) - CW(q - gamma - xi))`.

use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::ltft_core::{dft, idft, DigitalSignal, Grid, LtftParams, Spectrum};
use crate::ltft_core::window::HermiteTable;

/// Window-spectrum argument beyond which `|f^|^2` is treated as zero when
/// bounding supports.
pub const SPECTRAL_REACH: f64 = 16.0;

/// Relative floor below which bins are zeroed by the inverse.
pub const FLOOR_RATIO: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct FrameDiagonal {
    pub grid: Grid,
    pub h: Vec<f64>,
    pub q0: Vec<f64>,
    pub q1: Vec<f64>,
    pub q2: Vec<f64>,
    pub floor: f64,
}

impl FrameDiagonal {
    fn assemble(grid: Grid, comps: Vec<[f64; 3]>) -> Self {
        let q0: Vec<f64> = comps.iter().map(|c| c[0]).collect();
        let q1: Vec<f64> = comps.iter().map(|c| c[1]).collect();
        let q2: Vec<f64> = comps.iter().map(|c| c[2]).collect();
        let h: Vec<f64> = comps.iter().map(|c| c[0] + c[1] + c[2]).collect();
        let floor = FLOOR_RATIO * h.iter().cloned().fold(0.0, f64::max);
        Self { grid, h, q0, q1, q2, floor }
    }

    pub fn freq(&self, k: usize) -> f64 {
        k as f64 * self.grid.rate / self.grid.len as f64
    }

    pub fn max(&self) -> f64 {
        self.h.iter().cloned().fold(0.0, f64::max)
    }
}

/// Unaliased band components `[Q0, Q1, Q2]` at arbitrary frequencies.
pub struct FrameSymbol<'a> {
    params: &'a LtftParams,
    l: f64,
    running: HermiteTable,
}

const Q_LO: f64 = 1.0 / 16.0;
const Q_STEP: f64 = 1.0 / 256.0;

impl<'a> FrameSymbol<'a> {
    pub fn new(params: &'a LtftParams, l: f64) -> Result<Self> {
        if !(l >= params.b1) {
            return invalid(format!("sample rate {l} below b1 = {}", params.b1));
        }
        let w = &params.window;
        let (gamma, xi) = (params.gamma, params.xi);
        let q_hi = gamma + xi + w.table_half_width() + 1.0;
        let n = ((q_hi - Q_LO) / Q_STEP).ceil() as usize + 1;
        let mut v = Vec::with_capacity(n);
        let mut d = Vec::with_capacity(n);
        for i in 0..n {
            let q = Q_LO + i as f64 * Q_STEP;
            let p = gamma / xi * (w.cumulative_power(q - gamma) - w.cumulative_power(q - gamma - xi));
            let dp = gamma / xi * (w.power_spectrum(q - gamma) - w.power_spectrum(q - gamma - xi));
            v.push(p / q);
            d.push((dp * q - p) / (q * q));
        }
        let running = HermiteTable { x0: Q_LO, h: Q_STEP, v, d }.integrate(0.0);
        Ok(Self { params, l, running })
    }

    /// `P1(q) = gamma/xi int_0^xi |f^(q - z - gamma)|^2 dz`.
    pub fn p1(&self, q: f64) -> f64 {
        let (g, x, w) = (self.params.gamma, self.params.xi, &self.params.window);
        g / x * (w.cumulative_power(q - g) - w.cumulative_power(q - g - x))
    }

    /// `int_{Q_LO}^{q} P1(t)/t dt`, log-extended below the table.
    fn running(&self, q: f64) -> f64 {
        if q >= self.running.x_end() {
            *self.running.v.last().unwrap()
        } else if q >= Q_LO {
            self.running.eval(q).unwrap()
        } else {
            self.p1(Q_LO) * (q / Q_LO).ln()
        }
    }

    fn stft_band(&self, omega: f64, beta: f64, b_lo: f64, b_hi: f64) -> f64 {
        let p = self.params;
        let s = p.gamma / beta;
        let xh = s * (omega - b_lo);
        let xl = s * (omega - b_hi);
        let ccw = |x: f64| p.window.double_cumulative_power(x);
        ((ccw(xh) - ccw(xh - p.xi)) - (ccw(xl) - ccw(xl - p.xi))) / p.xi
    }

    pub fn components(&self, omega: f64) -> [f64; 3] {
        let p = self.params;
        let q0 = self.stft_band(omega, p.b0, 0.0, p.b0);
        let q2 = self.stft_band(omega, p.b1, p.b1, self.l);
        // For omega <= 0 the integrand sits at |f^| arguments below -gamma,
        // where the window spectrum is negligible.
        let q1 = if omega > 0.0 {
            self.running(p.gamma * omega / p.b0) - self.running(p.gamma * omega / p.b1)
        } else {
            0.0
        };
        [q0.max(0.0), q1.max(0.0), q2.max(0.0)]
    }

    /// Frequency range outside of which `H` is negligible.
    pub fn support(&self) -> (f64, f64) {
        let p = self.params;
        let r = SPECTRAL_REACH / p.gamma;
        let k = p.xi / p.gamma;
        let lo = (-r * p.b0).min(p.b1 * (1.0 - r)).min(p.b0 * (1.0 - r));
        let hi = (p.b0 * (1.0 + k + r)).max(p.b1 * (1.0 + k + r)).max(self.l + p.b1 * (k + r));
        (lo, hi)
    }

    /// Alias indices `p` with `omega + p L` inside the support for some
    /// `omega` in `[0, L)`.
    pub fn images(&self) -> std::ops::RangeInclusive<i64> {
        let (lo, hi) = self.support();
        ((lo / self.l).floor() as i64)..=((hi / self.l).floor() as i64)
    }
}

/// `h` on `omega_k = k L / M` from the closed-form band integrals.
pub fn frame_diagonal(params: &LtftParams, l: f64, m: usize) -> Result<FrameDiagonal> {
    let grid = Grid::new(m, l)?;
    let symbol = FrameSymbol::new(params, l)?;
    let images: Vec<i64> = symbol.images().collect();
    let comps: Vec<[f64; 3]> = (0..m)
        .into_par_iter()
        .map(|k| {
            let omega = k as f64 * l / m as f64;
            let mut acc = [0.0; 3];
            for &p in &images {
                let c = symbol.components(omega + p as f64 * l);
                for j in 0..3 {
                    acc[j] += c[j];
                }
            }
            acc
        })
        .collect();
    Ok(FrameDiagonal::assemble(grid, comps))
}

/// Two-dimensional midpoint rule with `n` nodes per axis for each band,
/// restricted to the part of the band where the integrand is non-negligible.
pub fn frame_symbol_midpoint(params: &LtftParams, l: f64, omega: f64, n: usize) -> [f64; 3] {
    let p = params;
    let v = SPECTRAL_REACH;
    let stft = |beta: f64, b_lo: f64, b_hi: f64| {
        let s = p.gamma / beta;
        let lo = b_lo.max(omega - (v + p.xi) / s);
        let hi = b_hi.min(omega + v / s);
        if !(lo < hi) {
            return 0.0;
        }
        let (db, dc) = ((hi - lo) / n as f64, 1.0 / n as f64);
        let mut acc = 0.0;
        for i in 0..n {
            let b = lo + (i as f64 + 0.5) * db;
            for j in 0..n {
                let c = (j as f64 + 0.5) * dc;
                acc += p.window.power_spectrum(s * (omega - b) - p.xi * c);
            }
        }
        acc * s * db * dc
    };
    // Wavelet band: q = gamma omega / b must lie in [gamma - v, gamma + xi + v].
    let wavelet = || {
        let (qa, qb) = (p.gamma - v, p.gamma + p.xi + v);
        let (mut lo, mut hi) = (p.b0, p.b1);
        if omega > 0.0 {
            lo = lo.max(p.gamma * omega / qb);
            if qa > 0.0 {
                hi = hi.min(p.gamma * omega / qa);
            }
        } else if omega < 0.0 {
            if qa >= 0.0 {
                return 0.0;
            }
            lo = lo.max(p.gamma * omega / qa);
        }
        if !(lo < hi) {
            return 0.0;
        }
        let (db, dc) = ((hi - lo) / n as f64, 1.0 / n as f64);
        let mut acc = 0.0;
        for i in 0..n {
            let b = lo + (i as f64 + 0.5) * db;
            let q = p.gamma * omega / b - p.gamma;
            let mut row = 0.0;
            for j in 0..n {
                let c = (j as f64 + 0.5) * dc;
                row += p.window.power_spectrum(q - p.xi * c);
            }
            acc += row * p.gamma / b;
        }
        acc * db * dc
    };
    [stft(p.b0, 0.0, p.b0), wavelet(), stft(p.b1, p.b1, l)]
}

/// Brute-force `h` by midpoint quadrature over `(b, c)` with one Richardson
/// step (`quad_res` and `quad_res / 2` nodes per axis).
pub fn frame_diagonal_oracle(params: &LtftParams, l: f64, m: usize, quad_res: usize) -> Result<FrameDiagonal> {
    if quad_res < 128 || quad_res % 2 != 0 {
        return invalid(format!("quad_res must be even and >= 128, got {quad_res}"));
    }
    if m > 4096 || (m as u128) * (quad_res as u128).pow(2) > 1 << 30 {
        return Err(Error::BudgetExceeded(format!("oracle with M = {m}, quad_res = {quad_res}")));
    }
    let grid = Grid::new(m, l)?;
    let images: Vec<i64> = FrameSymbol::new(params, l)?.images().collect();
    let comps: Vec<[f64; 3]> = (0..m)
        .into_par_iter()
        .map(|k| {
            let omega = k as f64 * l / m as f64;
            let mut acc = [0.0; 3];
            for &p in &images {
                let w = omega + p as f64 * l;
                let fine = frame_symbol_midpoint(params, l, w, quad_res);
                let coarse = frame_symbol_midpoint(params, l, w, quad_res / 2);
                for j in 0..3 {
                    acc[j] += ((4.0 * fine[j] - coarse[j]) / 3.0).max(0.0);
                }
            }
            acc
        })
        .collect();
    Ok(FrameDiagonal::assemble(grid, comps))
}

fn check_grid(signal: &DigitalSignal, hd: &FrameDiagonal) -> Result<()> {
    if signal.grid != hd.grid {
        return invalid(format!(
            "frame diagonal for M = {}, L = {} applied to M = {}, L = {}",
            hd.grid.len, hd.grid.rate, signal.grid.len, signal.grid.rate
        ));
    }
    Ok(())
}

/// Divides each DFT bin by `h_k`; bins with `h_k <= floor` are zeroed.
pub fn apply_inverse_frame(signal: &DigitalSignal, hd: &FrameDiagonal) -> Result<DigitalSignal> {
    check_grid(signal, hd)?;
    let mut spec: Spectrum = dft(signal);
    for (x, &h) in spec.bins.iter_mut().zip(&hd.h) {
        if h > hd.floor {
            *x /= h;
        } else {
            *x = 0.0.into();
        }
    }
    Ok(idft(&spec))
}

/// Multiplies each DFT bin by `h_k`.
pub fn apply_forward_frame(signal: &DigitalSignal, hd: &FrameDiagonal) -> Result<DigitalSignal> {
    check_grid(signal, hd)?;
    let mut spec = dft(signal);
    for (x, &h) in spec.bins.iter_mut().zip(&hd.h) {
        *x *= h;
    }
    Ok(idft(&spec))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn params(l: f64) -> LtftParams {
        LtftParams::defaults(l).unwrap()
    }

    /// Composite 8-point Gauss-Legendre.
    fn gauss_legendre(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
        const X: [f64; 4] = [0.183_434_642_495_649_8, 0.525_532_409_916_329, 0.796_666_477_413_626_7, 0.960_289_856_497_536_3];
        const W: [f64; 4] = [0.362_683_783_378_362, 0.313_706_645_877_887_3, 0.222_381_034_453_374_5, 0.101_228_536_290_376_3];
        let h = (b - a) / panels as f64;
        let mut acc = 0.0;
        for i in 0..panels {
            let mid = a + (i as f64 + 0.5) * h;
            for k in 0..4 {
                acc += W[k] * (f(mid - 0.5 * h * X[k]) + f(mid + 0.5 * h * X[k]));
            }
        }
        acc * 0.5 * h
    }

    #[test]
    fn components_sum_and_sign() {
        let hd = frame_diagonal(&params(64.0), 64.0, 256).unwrap();
        for k in 0..256 {
            assert_eq!(hd.h[k], hd.q0[k] + hd.q1[k] + hd.q2[k]);
            assert!(hd.q0[k] >= 0.0 && hd.q1[k] >= 0.0 && hd.q2[k] >= 0.0);
        }
    }

    #[test]
    fn low_band_vanishes_far_below_zero() {
        let p = params(64.0);
        let s = FrameSymbol::new(&p, 64.0).unwrap();
        assert!(s.components(-10.0 * 64.0)[0] < 1e-14);
        assert!(s.components(-10.0 * 64.0)[2] < 1e-14);
    }

    #[test]
    fn running_integral_matches_direct_quadrature() {
        let l = 64.0;
        let p = params(l);
        let s = FrameSymbol::new(&p, l).unwrap();
        let m = 256;
        let mut worst = 0.0f64;
        for k in 1..m {
            let omega = k as f64 * l / m as f64;
            let (a, b) = (p.gamma * omega / p.b1, p.gamma * omega / p.b0);
            let direct = gauss_legendre(|q| s.p1(q) / q, a, b, 4000);
            worst = worst.max((direct - s.components(omega)[1]).abs());
        }
        assert!(worst < 1e-8, "{worst}");
    }

    #[test]
    fn wavelet_band_mass_independent_of_xi() {
        // int Q1 d omega = (b1 - b0) int |f^|^2 for every xi.
        let l = 64.0;
        let mut p = params(l);
        let mut totals = Vec::new();
        for xi in [6.0, 12.0] {
            p.xi = xi;
            let s = FrameSymbol::new(&p, l).unwrap();
            let total = gauss_legendre(|w| s.components(w)[1], 0.0, 4.0 * l, 4000);
            assert!((total - (p.b1 - p.b0)).abs() < 1e-3 * (p.b1 - p.b0));
            totals.push(total);
        }
        assert!((totals[0] / totals[1] - 1.0).abs() < 0.01);
    }

    #[test]
    fn oracle_agrees_on_small_grid() {
        let l = 32.0;
        let p = params(l);
        let fast = frame_diagonal(&p, l, 64).unwrap();
        let slow = frame_diagonal_oracle(&p, l, 64, 128).unwrap();
        let top = fast.max();
        for k in 0..64 {
            if fast.h[k] > 1e-3 * top {
                let rel = (fast.h[k] - slow.h[k]).abs() / fast.h[k];
                assert!(rel < 1e-4, "k = {k}: {} vs {}", fast.h[k], slow.h[k]);
            }
        }
    }

    #[test]
    fn oracle_richardson_estimate_is_reliable() {
        let l = 32.0;
        let p = params(l);
        for &omega in &[0.3 * l, p.b0 * 1.01, p.b1 * 0.99, 0.7 * l] {
            let i = |n| frame_symbol_midpoint(&p, l, omega, n).iter().sum::<f64>();
            let (i64_, i128, i256) = (i(64), i(128), i(256));
            let estimate = (i128 - i64_).abs() / 3.0;
            let reference = (4.0 * i256 - i128) / 3.0;
            assert!((i128 - reference).abs() <= 4.0 * estimate + 1e-12, "omega = {omega}");
        }
    }

    #[test]
    fn oracle_budget_and_validation() {
        let p = params(32.0);
        assert!(matches!(frame_diagonal_oracle(&p, 32.0, 64, 64), Err(Error::InvalidParameter(_))));
        assert!(matches!(frame_diagonal_oracle(&p, 32.0, 8192, 128), Err(Error::BudgetExceeded(_))));
    }

    #[test]
    fn positive_on_operative_band() {
        let l = 128.0;
        let p = params(l);
        let hd = frame_diagonal(&p, l, 1024).unwrap();
        let delta = 2.0 * p.b0 * p.window.bandwidth() / p.gamma;
        let top = hd.max();
        for k in 0..1024 {
            let w = hd.freq(k);
            if w >= delta && w <= l - delta {
                assert!(hd.h[k] > 1e-3 * top, "hole at {w}");
            }
        }
    }

    #[test]
    fn inverse_undoes_forward() {
        let l = 64.0;
        let m = 256;
        let hd = frame_diagonal(&params(l), l, m).unwrap();
        let s = DigitalSignal::new(
            (0..m).map(|j| Complex64::new((j as f64 * 0.3).sin(), (j as f64 * 0.11).cos())).collect(),
            l,
        )
        .unwrap();
        let back = apply_inverse_frame(&apply_forward_frame(&s, &hd).unwrap(), &hd).unwrap();
        let (a, b) = (dft(&back), dft(&s));
        let top = hd.max();
        for k in 0..m {
            if hd.h[k] > 1e-3 * top {
                assert!((a.bins[k] - b.bins[k]).norm() <= 1e-6 * b.bins[k].norm().max(1e-12));
            }
        }
        let zero = apply_inverse_frame(&DigitalSignal::zeros(hd.grid), &hd).unwrap();
        assert!(zero.samples.iter().all(|z| z.norm() == 0.0));
        let other = DigitalSignal::zeros(Grid::new(128, l).unwrap());
        assert!(apply_inverse_frame(&other, &hd).is_err());
    }
}
