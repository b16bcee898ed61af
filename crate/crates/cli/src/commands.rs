use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;

use qmc_ltft::baselines::{
    discrepancy_scaling, dwt_with_size, funnel_coverage, interior_queries, DwtGridParams, PointFamily,
    DEFAULT_FUNNEL_NU,
};
use qmc_ltft::frame_op::frame_diagonal;
use qmc_ltft::ltft_core::{make_window, DigitalSignal, Grid, LtftParams, PhaseSpaceBox, WindowKind};
use qmc_ltft::processing::{
    grid_frequency, multiplier_apply, phase_vocoder, pointwise_nonlinearity, soft_threshold, Reconstructor,
    SequenceKind, VocoderJob,
};

use crate::bench::{bench_reconstruction, complexity_count, default_test_signal, Method};
use crate::config::{ConfigFile, Settings};
use crate::csv_out::{float, write_table};
use crate::error::{CliError, CliResult};
use crate::wav::{wav_read, wav_write, WavAudio};

#[derive(Debug, Parser)]
#[command(name = "qmc-ltft", version, about = "Quasi-Monte Carlo sampled localizing time-frequency transforms")]
pub struct Cli {
    /// `key = value` file; flags override its entries.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub transform: TransformArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct TransformArgs {
    /// Lower band edge as a fraction of the sample rate.
    #[arg(long, global = true)]
    pub b0_frac: Option<f64>,
    /// Upper band edge as a fraction of the sample rate.
    #[arg(long, global = true)]
    pub b1_frac: Option<f64>,
    /// Oscillations per atom.
    #[arg(long, global = true)]
    pub gamma: Option<f64>,
    /// Oscillation range of the c axis.
    #[arg(long, global = true)]
    pub xi: Option<f64>,
    /// Window, `cos<k>` for k in 3..=12.
    #[arg(long, global = true)]
    pub window: Option<String>,
}

#[derive(Debug, Args)]
pub struct AudioArgs {
    pub input: PathBuf,
    pub output: PathBuf,
    /// Samples per grid sample, `N = ceil(A M)`.
    #[arg(long)]
    pub redundancy: Option<f64>,
    /// Exact sample count; overrides the redundancy.
    #[arg(long)]
    pub samples: Option<usize>,
    /// `hammersley`, `halton`, `mc` or `mc:<seed>`.
    #[arg(long)]
    pub sequence: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Analysis followed by frame-normalized synthesis.
    Reconstruct(AudioArgs),
    /// Integer time dilation with preserved frequencies.
    Vocoder {
        #[command(flatten)]
        audio: AudioArgs,
        #[arg(long)]
        dilation: Option<u32>,
    },
    /// Soft thresholding of the coefficients.
    Denoise {
        #[command(flatten)]
        audio: AudioArgs,
        /// Threshold as a fraction of the largest coefficient magnitude.
        #[arg(long)]
        threshold: Option<f64>,
    },
    /// Band-pass multiplier keeping atoms centred in `lo,hi` Hz.
    Multiplier {
        #[command(flatten)]
        audio: AudioArgs,
        #[arg(long)]
        band: Option<String>,
    },
    /// Reconstruction error against redundancy.
    BenchError {
        #[arg(long)]
        csv: PathBuf,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        methods: Option<String>,
        #[arg(long)]
        redundancies: Option<String>,
        /// Monte Carlo seeds per point.
        #[arg(long)]
        seeds: Option<u64>,
        #[arg(long)]
        signal_seed: Option<u64>,
    },
    /// Exact star discrepancy against set size.
    BenchDiscrepancy {
        #[arg(long)]
        csv: PathBuf,
        #[arg(long)]
        families: Option<String>,
        #[arg(long)]
        ns: Option<String>,
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long)]
        seeds: Option<usize>,
    },
    /// Synthesis work against the predicted count.
    BenchComplexity {
        #[arg(long)]
        csv: PathBuf,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        ns: Option<String>,
        #[arg(long)]
        sequence: Option<String>,
    },
    /// Diagonal of the frame operator.
    FrameDiag {
        #[arg(long)]
        csv: PathBuf,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        rate: Option<f64>,
    },
    /// Funnel coverage of Hammersley and DWT samples.
    Coverage {
        #[arg(long)]
        csv: PathBuf,
        #[arg(long)]
        m: Option<usize>,
        /// Samples per grid sample.
        #[arg(long)]
        ratio: Option<usize>,
        #[arg(long)]
        dwt_r: Option<f64>,
        /// Queries per side of the query grid.
        #[arg(long)]
        queries: Option<usize>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Reconstruct(_) => "reconstruct",
            Command::Vocoder { .. } => "vocoder",
            Command::Denoise { .. } => "denoise",
            Command::Multiplier { .. } => "multiplier",
            Command::BenchError { .. } => "bench-error",
            Command::BenchDiscrepancy { .. } => "bench-discrepancy",
            Command::BenchComplexity { .. } => "bench-complexity",
            Command::FrameDiag { .. } => "frame-diag",
            Command::Coverage { .. } => "coverage",
        }
    }
}

fn parse<T: std::str::FromStr>(key: &str, s: &str) -> CliResult<T>
where
    T::Err: std::fmt::Display,
{
    s.parse().map_err(|e| CliError::config(format!("{key}: {e}")))
}

fn resolve_params(t: &TransformArgs, s: &mut Settings, l: f64) -> CliResult<LtftParams> {
    let c1 = s.pick("b0_frac", t.b0_frac, qmc_ltft::ltft_core::DEFAULT_C1)?;
    let c2 = s.pick("b1_frac", t.b1_frac, qmc_ltft::ltft_core::DEFAULT_C2)?;
    let gamma = s.pick("gamma", t.gamma, qmc_ltft::ltft_core::DEFAULT_GAMMA)?;
    let xi = s.pick("xi", t.xi, qmc_ltft::ltft_core::DEFAULT_XI)?;
    let window: String = s.pick("window", t.window.clone(), WindowKind::default().to_string())?;
    let window = make_window(parse::<WindowKind>("window", &window)?)?;
    Ok(LtftParams::new(window, c1 * l, c2 * l, gamma, xi)?)
}

fn sequence(s: &mut Settings, flag: Option<String>) -> CliResult<SequenceKind> {
    let raw: String = s.pick("sequence", flag, "hammersley".to_string())?;
    parse("sequence", &raw)
}

fn positive(key: &str, v: f64) -> CliResult<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::invalid(format!("{key} must be positive, got {v}")))
    }
}

/// Mono audio zero-padded by one long-atom length on each side, and to an
/// even total length.
struct PaddedAudio {
    signal: DigitalSignal,
    pad: usize,
    len: usize,
    rate: u32,
}

impl PaddedAudio {
    fn new(audio: &WavAudio, params: &LtftParams) -> CliResult<Self> {
        let pad = (params.s0() * audio.rate as f64).ceil() as usize;
        let len = audio.samples.len();
        let total = len + 2 * pad;
        let total = total + total % 2;
        let mut x = vec![0.0; total];
        x[pad..pad + len].copy_from_slice(&audio.samples);
        let signal = DigitalSignal::from_real(&x, audio.rate as f64)?;
        Ok(Self { signal, pad, len, rate: audio.rate })
    }

    fn write(&self, path: &Path, out: &DigitalSignal, dilation: usize) -> CliResult<()> {
        let x = out.real_part();
        let start = self.pad * dilation;
        let samples = x[start..start + self.len * dilation].to_vec();
        wav_write(path, &WavAudio { samples, rate: self.rate })
    }
}

fn audio_job(
    cli: &Cli,
    s: &mut Settings,
    audio: &AudioArgs,
    default_redundancy: f64,
) -> CliResult<(PaddedAudio, LtftParams, SequenceKind, usize)> {
    let wav = wav_read(&audio.input)?;
    if wav.samples.is_empty() {
        return Err(CliError::new("parse-error", "WAV file has no samples"));
    }
    let params = resolve_params(&cli.transform, s, wav.rate as f64)?;
    let padded = PaddedAudio::new(&wav, &params)?;
    let kind = sequence(s, audio.sequence.clone())?;
    let m = padded.signal.len();
    let n = match s.maybe("samples", audio.samples)? {
        Some(0) => return Err(CliError::invalid("samples must be positive")),
        Some(n) => n,
        None => {
            let a = positive("redundancy", s.pick("redundancy", audio.redundancy, default_redundancy)?)?;
            (a * m as f64).ceil() as usize
        }
    };
    Ok((padded, params, kind, n))
}

const AUDIO_REDUNDANCY: f64 = 16.0;
const DEFAULT_M: usize = 1024;

pub fn run(cli: &Cli) -> CliResult<()> {
    let file = match &cli.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    let mut s = Settings::new(&file);
    let command = cli.command.name();
    match &cli.command {
        Command::Reconstruct(audio) => {
            let (job, params, kind, n) = audio_job(cli, &mut s, audio, AUDIO_REDUNDANCY)?;
            let rec = Reconstructor::new(&params, job.signal.grid, kind, n)?;
            let out = rec.process_real(&job.signal, |c, _| Ok(c))?;
            job.write(&audio.output, &out, 1)
        }
        Command::Vocoder { audio, dilation } => {
            let d: u32 = s.pick("dilation", *dilation, 2)?;
            if d == 0 {
                return Err(CliError::invalid("dilation must be >= 1"));
            }
            let (job, params, kind, n) = audio_job(cli, &mut s, audio, 4.0 * d as f64)?;
            let mut vj = VocoderJob::new(d, kind, params);
            vj.redundancy = n as f64 / job.signal.len() as f64;
            let out = phase_vocoder(&job.signal, &vj)?;
            job.write(&audio.output, &out, d as usize)
        }
        Command::Denoise { audio, threshold } => {
            let frac = s.pick("threshold", *threshold, 0.15)?;
            if !(0.0..=1.0).contains(&frac) {
                return Err(CliError::invalid(format!("threshold {frac} outside [0, 1]")));
            }
            let (job, params, kind, n) = audio_job(cli, &mut s, audio, AUDIO_REDUNDANCY)?;
            let rec = Reconstructor::new(&params, job.signal.grid, kind, n)?;
            let out = rec.process_real(&job.signal, |c, _| {
                let top = c.values.iter().map(|z| z.norm()).fold(0.0, f64::max);
                Ok(pointwise_nonlinearity(&c, soft_threshold(frac * top)))
            })?;
            job.write(&audio.output, &out, 1)
        }
        Command::Multiplier { audio, band } => {
            let band: Option<String> = s.maybe("band", band.clone())?;
            let band = band.ok_or_else(|| CliError::invalid("multiplier needs --band lo,hi"))?;
            let (lo, hi) = band
                .split_once(',')
                .ok_or_else(|| CliError::config(format!("band: expected lo,hi, got '{band}'")))?;
            let (lo, hi): (f64, f64) = (parse("band", lo.trim())?, parse("band", hi.trim())?);
            if !(lo <= hi) {
                return Err(CliError::invalid(format!("empty band [{lo}, {hi}]")));
            }
            let (job, params, kind, n) = audio_job(cli, &mut s, audio, AUDIO_REDUNDANCY)?;
            let l = job.signal.rate();
            let rec = Reconstructor::new(&params, job.signal.grid, kind, n)?;
            let out = rec.process_real(&job.signal, |c, set| {
                multiplier_apply(&c, set, |_, b, cc| {
                    let f = grid_frequency(&params, b, cc, l);
                    Complex64::new(if (lo..=hi).contains(&f) { 1.0 } else { 0.0 }, 0.0)
                })
            })?;
            job.write(&audio.output, &out, 1)
        }
        Command::BenchError { csv, m, methods, redundancies, seeds, signal_seed } => {
            let m = s.pick("m", *m, DEFAULT_M)?;
            let params = resolve_params(&cli.transform, &mut s, m as f64)?;
            let methods: Vec<Method> = s.list("methods", methods.as_deref(), "hammersley,mc")?;
            let reds: Vec<f64> = s.list("redundancies", redundancies.as_deref(), "1,2,4,8,16,32,64")?;
            for &a in &reds {
                positive("redundancy", a)?;
            }
            let seeds = s.pick("seeds", *seeds, 10u64)?;
            let signal_seed = s.pick("signal_seed", *signal_seed, 0u64)?;
            let grid = Grid::new(m, m as f64)?;
            let signal = default_test_signal(&params, grid, signal_seed)?;
            let rows = bench_reconstruction(&signal, &params, &methods, &reds, seeds)?;
            let rows: Vec<Vec<String>> = rows
                .iter()
                .map(|r| vec![r.method.to_string(), float(r.redundancy), r.n.to_string(), float(r.error), float(r.std)])
                .collect();
            write_table(csv, &s.comment(command), &["method", "redundancy", "n", "rel_error", "std"], &rows)
        }
        Command::BenchDiscrepancy { csv, families, ns, dim, seeds } => {
            let names: Vec<String> = s.list("families", families.as_deref(), "hammersley,halton,mc,dwt,lattice")?;
            let ns: Vec<usize> = s.list("ns", ns.as_deref(), "8,16,32,64,128")?;
            let dim = s.pick("dim", *dim, 2usize)?;
            let seeds = s.pick("seeds", *seeds, 10usize)?;
            let mut rows = Vec::new();
            for name in &names {
                let family = match name.as_str() {
                    "hammersley" => PointFamily::Hammersley,
                    "halton" => PointFamily::Halton,
                    "mc" => PointFamily::Mc { seeds: seeds as u64 },
                    "dwt" => PointFamily::DwtGrid,
                    "lattice" => PointFamily::Lattice,
                    other => return Err(CliError::config(format!("families: unknown family '{other}'"))),
                };
                let t = discrepancy_scaling(family, &ns, dim)?;
                for r in &t.rows {
                    rows.push(vec![
                        family.name().to_string(),
                        dim.to_string(),
                        r.target.to_string(),
                        r.n.to_string(),
                        float(r.d_star),
                        float(t.slope),
                    ]);
                }
            }
            write_table(csv, &s.comment(command), &["family", "dim", "target", "n", "d_star", "slope"], &rows)
        }
        Command::BenchComplexity { csv, m, ns, sequence: seq } => {
            let m = s.pick("m", *m, DEFAULT_M)?;
            let l = m as f64;
            let params = resolve_params(&cli.transform, &mut s, l)?;
            let ns: Vec<usize> = s.list("ns", ns.as_deref(), "256,512,1024,2048,4096,8192,16384")?;
            let kind = sequence(&mut s, seq.clone())?;
            let bx = PhaseSpaceBox::for_signal(m, l, 0.0)?;
            let mut rows = Vec::new();
            for &n in &ns {
                let c = complexity_count(&kind.samples(n, &bx)?, &params, l)?;
                rows.push(vec![
                    n.to_string(),
                    c.actual.to_string(),
                    float(c.predicted),
                    float(c.actual as f64 / n as f64),
                ]);
            }
            write_table(csv, &s.comment(command), &["n", "actual", "predicted", "per_sample"], &rows)
        }
        Command::FrameDiag { csv, m, rate } => {
            let m = s.pick("m", *m, DEFAULT_M)?;
            let l = positive("rate", s.pick("rate", *rate, m as f64)?)?;
            let params = resolve_params(&cli.transform, &mut s, l)?;
            let hd = frame_diagonal(&params, l, m)?;
            let rows: Vec<Vec<String>> = (0..m)
                .map(|k| {
                    vec![k.to_string(), float(hd.freq(k)), float(hd.h[k]), float(hd.q0[k]), float(hd.q1[k]), float(hd.q2[k])]
                })
                .collect();
            write_table(csv, &s.comment(command), &["k", "omega", "h", "q0", "q1", "q2"], &rows)
        }
        Command::Coverage { csv, m, ratio, dwt_r, queries } => {
            let m = s.pick("m", *m, DEFAULT_M)?;
            let l = m as f64;
            let params = resolve_params(&cli.transform, &mut s, l)?;
            let ratio = s.pick("ratio", *ratio, 16usize)?;
            let r = s.pick("dwt_r", *dwt_r, 1.1)?;
            let side = s.pick("queries", *queries, 10usize)?;
            if ratio == 0 || side == 0 {
                return Err(CliError::invalid("ratio and queries must be positive"));
            }
            let n = ratio * m;
            let bx = PhaseSpaceBox::for_signal(m, l, 0.0)?;
            let qs = interior_queries(&bx, params.b0, params.b1, params.gamma, side, side);
            let ham = SequenceKind::Hammersley.samples(n, &bx)?;
            let dwt = dwt_with_size(n, DwtGridParams { r, p: 1.0, b0: params.b0, l, m, gamma: params.gamma })?;
            let mut rows = Vec::new();
            for (name, set) in [("hammersley", &ham), ("dwt", &dwt.samples)] {
                let rep = funnel_coverage(set, &qs, params.gamma, DEFAULT_FUNNEL_NU)?;
                for (q, v) in qs.iter().zip(&rep.values) {
                    rows.push(vec![
                        name.to_string(),
                        set.len().to_string(),
                        float(q.a),
                        float(q.b),
                        v.map(float).unwrap_or_default(),
                        float(rep.ratio),
                    ]);
                }
            }
            write_table(csv, &s.comment(command), &["family", "n", "a", "b", "coverage", "ratio"], &rows)
        }
    }
}
