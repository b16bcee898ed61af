//! Digital signals, LTFT windows and atoms, and the sampled analysis and
//! synthesis operators.

mod atom;
mod signal;
mod transform;
pub(crate) mod window;

pub use atom::{atom_support_length, ltft_atom_freq, ltft_atom_time, Band, SparseAtom};
pub use signal::{dft, from_analytic, idft, to_analytic, DigitalSignal, Grid, Spectrum};
pub use transform::{analyze, synthesize, CoefficientVector};
pub use window::{make_window, WindowKind, WindowSpec};

use crate::error::{invalid, Result};

/// Where a sample set came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Generator {
    Halton,
    Hammersley,
    Mc,
    DwtGrid,
    Regular,
    External,
}

impl Generator {
    pub fn as_str(self) -> &'static str {
        match self {
            Generator::Halton => "halton",
            Generator::Hammersley => "hammersley",
            Generator::Mc => "mc",
            Generator::DwtGrid => "dwt-grid",
            Generator::Regular => "regular",
            Generator::External => "scaled-extern",
        }
    }
}

/// Rectangular phase-space domain: time x frequency x oscillation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseSpaceBox {
    pub time: (f64, f64),
    pub freq: (f64, f64),
    pub osc: (f64, f64),
}

impl PhaseSpaceBox {
    /// Box `time x [0, l] x [0, 1]`.
    pub fn new(time: (f64, f64), l: f64) -> Result<Self> {
        Self::with_sides(time, (0.0, l), (0.0, 1.0))
    }

    pub fn with_sides(time: (f64, f64), freq: (f64, f64), osc: (f64, f64)) -> Result<Self> {
        let ok = |(lo, hi): (f64, f64)| lo.is_finite() && hi.is_finite() && lo < hi;
        if !ok(time) || !ok(freq) || !ok(osc) {
            return invalid("phase-space box sides must be finite with lo < hi");
        }
        Ok(Self { time, freq, osc })
    }

    /// `[-M/2L, M/2L] x [0, L] x [0, 1]`, optionally padded in time by `pad`
    /// on each side.
    pub fn for_signal(m: usize, l: f64, pad: f64) -> Result<Self> {
        let half = m as f64 / (2.0 * l);
        Self::new((-half - pad, half + pad), l)
    }

    pub fn volume(&self) -> f64 {
        (self.time.1 - self.time.0) * (self.freq.1 - self.freq.0) * (self.osc.1 - self.osc.0)
    }

    pub fn contains(&self, g: &[f64; 3]) -> bool {
        let inside = |x: f64, (lo, hi): (f64, f64)| x >= lo && x <= hi;
        inside(g[0], self.time) && inside(g[1], self.freq) && inside(g[2], self.osc)
    }

    /// Time side scaled by `d`; frequency and oscillation sides unchanged.
    pub fn dilated(&self, d: f64) -> Self {
        Self { time: (self.time.0 * d, self.time.1 * d), ..*self }
    }
}

/// Phase-space points `(a, b, c)` inside a box.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    pub points: Vec<[f64; 3]>,
    pub bx: PhaseSpaceBox,
    pub generator: Generator,
}

impl SampleSet {
    pub fn new(points: Vec<[f64; 3]>, bx: PhaseSpaceBox, generator: Generator) -> Result<Self> {
        if let Some(p) = points.iter().find(|p| !bx.contains(p)) {
            return invalid(format!("sample {p:?} outside the phase-space box"));
        }
        Ok(Self { points, bx, generator })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn volume(&self) -> f64 {
        self.bx.volume()
    }

    /// Same frequencies and oscillations with times scaled by `d`.
    pub fn dilated(&self, d: f64) -> Self {
        Self {
            points: self.points.iter().map(|&[a, b, c]| [a * d, b, c]).collect(),
            bx: self.bx.dilated(d),
            generator: self.generator,
        }
    }
}

/// Window, transition frequencies and oscillation parameters of the transform.
#[derive(Debug, Clone)]
pub struct LtftParams {
    pub window: WindowSpec,
    pub b0: f64,
    pub b1: f64,
    pub gamma: f64,
    pub xi: f64,
}

pub const DEFAULT_C1: f64 = 0.1;
pub const DEFAULT_C2: f64 = 0.4;
pub const DEFAULT_GAMMA: f64 = 6.0;
pub const DEFAULT_XI: f64 = 6.0;

impl LtftParams {
    pub fn new(window: WindowSpec, b0: f64, b1: f64, gamma: f64, xi: f64) -> Result<Self> {
        if !(b0 > 0.0 && b1 > b0 && b1.is_finite()) {
            return invalid(format!("need 0 < b0 < b1, got b0 = {b0}, b1 = {b1}"));
        }
        if !(gamma > 0.0 && gamma.is_finite() && xi > 0.0 && xi.is_finite()) {
            return invalid(format!("need gamma > 0 and xi > 0, got {gamma}, {xi}"));
        }
        Ok(Self { window, b0, b1, gamma, xi })
    }

    /// Transition frequencies `b0 = c1 L`, `b1 = c2 L`.
    pub fn for_rate(l: f64, c1: f64, c2: f64, gamma: f64, xi: f64) -> Result<Self> {
        if !(0.0 < c1 && c1 < c2 && c2 <= 1.0) {
            return invalid(format!("need 0 < C1 < C2 <= 1, got {c1}, {c2}"));
        }
        if !(l > 0.0 && l.is_finite()) {
            return invalid(format!("sample rate must be positive, got {l}"));
        }
        Self::new(make_window(WindowKind::default())?, c1 * l, c2 * l, gamma, xi)
    }

    pub fn defaults(l: f64) -> Result<Self> {
        Self::for_rate(l, DEFAULT_C1, DEFAULT_C2, DEFAULT_GAMMA, DEFAULT_XI)
    }

    /// Largest atom support `gamma / b0`.
    pub fn s0(&self) -> f64 {
        self.gamma / self.b0
    }

    /// Smallest atom support `gamma / b1`.
    pub fn s1(&self) -> f64 {
        self.gamma / self.b1
    }
}
