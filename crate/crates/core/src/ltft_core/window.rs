use std::collections::HashMap;
use std::f64::consts::PI;
use std::str::FromStr;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{invalid, Error, Result};

/// Window family. `RaisedCosine { power }` is `cos^power(pi t)` on `(-1/2, 1/2)`;
/// powers below 3 are rejected because the zero extension would not be C^2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WindowKind {
    RaisedCosine { power: u32 },
}

impl Default for WindowKind {
    fn default() -> Self {
        WindowKind::RaisedCosine { power: 4 }
    }
}

impl FromStr for WindowKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let power = match s {
            "raised-cosine" | "default" => 4,
            _ => match s.strip_prefix("cos").and_then(|p| p.parse::<u32>().ok()) {
                Some(p) => p,
                None => return invalid(format!("unknown window kind {s:?}")),
            },
        };
        if !(3..=12).contains(&power) {
            return invalid(format!("raised-cosine power {power} outside 3..=12"));
        }
        Ok(WindowKind::RaisedCosine { power })
    }
}

impl std::fmt::Display for WindowKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            WindowKind::RaisedCosine { power } => write!(f, "cos{power}"),
        }
    }
}

/// Unit-norm window with its tabulated spectrum.
///
/// Spectrum convention: `f^(nu) = int f(t) e^{-2 pi i nu t} dt`. The window is
/// real and even, so `f^` is real.
#[derive(Debug, Clone)]
pub struct WindowSpec {
    pub kind: WindowKind,
    norm: f64,
    tables: Arc<Tables>,
}

pub fn make_window(kind: WindowKind) -> Result<WindowSpec> {
    let WindowKind::RaisedCosine { power } = kind;
    if !(3..=12).contains(&power) {
        return invalid(format!("raised-cosine power {power} outside 3..=12"));
    }
    let norm = raised_cosine_norm(power);
    static CACHE: OnceLock<Mutex<HashMap<WindowKind, Arc<Tables>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let tables = {
        let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
        guard.entry(kind).or_insert_with(|| Arc::new(Tables::build(power, norm))).clone()
    };
    Ok(WindowSpec { kind, norm, tables })
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `1 / sqrt(int cos^{2p}(pi t) dt)` over `(-1/2, 1/2)`; the integral is
/// `C(2p, p) / 4^p`.
fn raised_cosine_norm(power: u32) -> f64 {
    let energy = binomial(2 * power, power) / 4f64.powi(power as i32);
    1.0 / energy.sqrt()
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - (PI * x).powi(2) / 6.0
    } else {
        (PI * x).sin() / (PI * x)
    }
}

impl WindowSpec {
    fn power(&self) -> u32 {
        let WindowKind::RaisedCosine { power } = self.kind;
        power
    }

    /// Window value; zero outside `(-1/2, 1/2)`.
    pub fn eval(&self, t: f64) -> f64 {
        if t.abs() >= 0.5 {
            return 0.0;
        }
        self.norm * (PI * t).cos().powi(self.power() as i32)
    }

    /// `k`-th derivative for `k <= 2`.
    pub fn derivative(&self, t: f64, k: u32) -> f64 {
        if t.abs() >= 0.5 {
            return 0.0;
        }
        let p = self.power() as i32;
        let (s, c) = (PI * t).sin_cos();
        let pf = p as f64;
        match k {
            0 => self.norm * c.powi(p),
            1 => -self.norm * PI * pf * c.powi(p - 1) * s,
            2 => self.norm * PI * PI * pf * ((pf - 1.0) * c.powi(p - 2) * s * s - c.powi(p)),
            _ => panic!("derivative order {k} not provided"),
        }
    }

    /// Tabulated spectrum `f^(nu)`, zero beyond the table.
    pub fn spectrum(&self, nu: f64) -> f64 {
        self.tables.fhat.eval(nu).unwrap_or(0.0)
    }

    /// Closed form of the spectrum as a sum of shifted sincs.
    pub fn spectrum_exact(&self, nu: f64) -> f64 {
        let p = self.power();
        let s: f64 = (0..=p)
            .map(|k| binomial(p, k) * sinc(nu - (p as f64 - 2.0 * k as f64) / 2.0))
            .sum();
        self.norm * s / 2f64.powi(p as i32)
    }

    /// `|f^(nu)|^2`.
    pub fn power_spectrum(&self, nu: f64) -> f64 {
        let v = self.spectrum(nu);
        v * v
    }

    /// `int_{-inf}^{nu} |f^|^2`.
    pub fn cumulative_power(&self, nu: f64) -> f64 {
        let t = &self.tables.cw;
        if nu <= t.x0 {
            0.0
        } else {
            t.eval(nu).unwrap_or_else(|| *t.v.last().unwrap())
        }
    }

    /// `int_{-inf}^{nu} cumulative_power`.
    pub fn double_cumulative_power(&self, nu: f64) -> f64 {
        let t = &self.tables.ccw;
        if nu <= t.x0 {
            return 0.0;
        }
        match t.eval(nu) {
            Some(v) => v,
            None => {
                let end = t.x_end();
                t.v.last().unwrap() + (nu - end) * self.tables.cw.v.last().unwrap()
            }
        }
    }

    /// Half-width of the main spectral lobe (first zero of `f^`).
    pub fn bandwidth(&self) -> f64 {
        self.tables.bandwidth
    }

    /// Spectrum table covers `[-v, v]`.
    pub fn table_half_width(&self) -> f64 {
        -self.tables.fhat.x0
    }
}

/// Cubic Hermite table on a uniform grid.
#[derive(Debug)]
pub(crate) struct HermiteTable {
    pub x0: f64,
    pub h: f64,
    pub v: Vec<f64>,
    pub d: Vec<f64>,
}

impl HermiteTable {
    pub fn x_end(&self) -> f64 {
        self.x0 + self.h * (self.v.len() - 1) as f64
    }

    /// Interpolated value, `None` outside the table.
    pub fn eval(&self, x: f64) -> Option<f64> {
        let s = (x - self.x0) / self.h;
        let last = self.v.len() - 1;
        if !(s >= 0.0 && s <= last as f64) {
            return None;
        }
        let i = (s.floor() as usize).min(last - 1);
        let t = s - i as f64;
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        Some(h00 * self.v[i] + h10 * self.h * self.d[i] + h01 * self.v[i + 1] + h11 * self.h * self.d[i + 1])
    }

    /// Running integral with the endpoint-corrected trapezoid rule, which is
    /// exact for the cubic Hermite interpolant of the integrand.
    pub fn integrate(&self, start: f64) -> HermiteTable {
        let mut v = Vec::with_capacity(self.v.len());
        let mut acc = start;
        v.push(acc);
        let h = self.h;
        for i in 0..self.v.len() - 1 {
            acc += 0.5 * h * (self.v[i] + self.v[i + 1]) + h * h / 12.0 * (self.d[i] - self.d[i + 1]);
            v.push(acc);
        }
        HermiteTable { x0: self.x0, h, v, d: self.v.clone() }
    }
}

#[derive(Debug)]
struct Tables {
    fhat: HermiteTable,
    cw: HermiteTable,
    ccw: HermiteTable,
    bandwidth: f64,
}

/// Time samples per unit for the dense DFT.
const TIME_RATE: usize = 2048;
/// Zero-padded span in time units; the spectrum spacing is its inverse.
const SPAN: usize = 256;
/// Spectrum table half-width.
const HALF_WIDTH: f64 = 40.0;

impl Tables {
    fn build(power: u32, norm: f64) -> Self {
        let n = TIME_RATE * SPAN;
        let dt = 1.0 / TIME_RATE as f64;
        let half = TIME_RATE / 2;
        let w = |t: f64| norm * (PI * t).cos().powi(power as i32);
        // Samples placed circularly around t = 0 so the transform is real.
        let mut f = vec![Complex64::new(0.0, 0.0); n];
        let mut g = vec![Complex64::new(0.0, 0.0); n];
        for j in 0..half {
            let t = j as f64 * dt;
            let v = w(t);
            f[j] = Complex64::new(v, 0.0);
            g[j] = Complex64::new(0.0, -2.0 * PI * t * v);
            if j > 0 {
                f[n - j] = Complex64::new(v, 0.0);
                g[n - j] = Complex64::new(0.0, 2.0 * PI * t * v);
            }
        }
        let fft = FftPlanner::new().plan_fft_forward(n);
        fft.process(&mut f);
        fft.process(&mut g);

        let h = 1.0 / SPAN as f64;
        let k_max = (HALF_WIDTH * SPAN as f64) as usize;
        let bin = |k: isize| if k >= 0 { k as usize } else { (n as isize + k) as usize };
        let mut fv = Vec::with_capacity(2 * k_max + 1);
        let mut fd = Vec::with_capacity(2 * k_max + 1);
        for k in -(k_max as isize)..=(k_max as isize) {
            fv.push(f[bin(k)].re * dt);
            fd.push(g[bin(k)].re * dt);
        }
        let fhat = HermiteTable { x0: -HALF_WIDTH, h, v: fv, d: fd };

        let power_table = HermiteTable {
            x0: fhat.x0,
            h,
            v: fhat.v.iter().map(|x| x * x).collect(),
            d: fhat.v.iter().zip(&fhat.d).map(|(x, dx)| 2.0 * x * dx).collect(),
        };
        let cw = power_table.integrate(0.0);
        let ccw = cw.integrate(0.0);

        let centre = k_max;
        let mut bandwidth = HALF_WIDTH;
        for i in centre..fhat.v.len() - 1 {
            let (a, b) = (fhat.v[i], fhat.v[i + 1]);
            if a > 0.0 && b <= 0.0 {
                bandwidth = (i - centre) as f64 * h + h * a / (a - b);
                break;
            }
        }
        Tables { fhat, cw, ccw, bandwidth }
    }
}
