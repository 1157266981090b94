//! Sequence-length scaling laws, their evolution over training, equal
//! wall-time comparisons and forward FLOP accounting.

use std::fmt;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ScalingError {
    #[error("need at least {need} points, got {got}")]
    TooFewPoints { need: usize, got: usize },
    #[error("point {index}: lengths, losses and steps must be positive and finite")]
    NonPositive { index: usize },
    #[error("length {0} appears more than once")]
    DuplicateLength(f64),
    #[error("all points share one step count")]
    Degenerate,
    #[error("invalid FLOP config: {0}")]
    Config(String),
}

/// `loss(L) = a * L^-alpha`, fitted in log-log space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLawFit {
    pub a: f64,
    pub alpha: f64,
    pub r2: f64,
    /// Step count the points were measured at, when known.
    pub s: Option<f64>,
}

impl PowerLawFit {
    pub fn eval(&self, l: f64) -> f64 {
        self.a * l.powf(-self.alpha)
    }

    /// Loss ratio for each doubling of the length.
    pub fn per_doubling(&self) -> f64 {
        2f64.powf(-self.alpha)
    }
}

/// Ordinary least squares on `(ln L, ln loss)`.
pub fn fit_power_law(points: &[(f64, f64)]) -> Result<PowerLawFit, ScalingError> {
    if points.len() < 3 {
        return Err(ScalingError::TooFewPoints { need: 3, got: points.len() });
    }
    for (i, &(l, y)) in points.iter().enumerate() {
        if !(l > 0.0 && y > 0.0 && l.is_finite() && y.is_finite()) {
            return Err(ScalingError::NonPositive { index: i });
        }
        if points[..i].iter().any(|p| p.0 == l) {
            return Err(ScalingError::DuplicateLength(l));
        }
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let r2 = if syy == 0.0 { 1.0 } else { (1.0 - sse / syy).clamp(0.0, 1.0) };
    Ok(PowerLawFit { a: intercept.exp(), alpha: -slope, r2, s: None })
}

/// `alpha(s) = alpha_inf * (1 - exp(-s / tau))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaDynamics {
    pub alpha_inf: f64,
    pub tau: f64,
}

impl AlphaDynamics {
    pub fn eval(&self, s: f64) -> f64 {
        self.alpha_inf * (1.0 - (-s / self.tau).exp())
    }
}

fn sse(points: &[(f64, f64)], a: f64, tau: f64) -> f64 {
    points.iter().map(|&(s, y)| (a * (1.0 - (-s / tau).exp()) - y).powi(2)).sum()
}

/// Damped Gauss-Newton from one seed.
fn gauss_newton(points: &[(f64, f64)], mut a: f64, mut tau: f64) -> (f64, f64, f64) {
    let mut cur = sse(points, a, tau);
    for _ in 0..500 {
        let (mut jtj, mut jtr) = ([[0.0f64; 2]; 2], [0.0f64; 2]);
        for &(s, y) in points {
            let e = (-s / tau).exp();
            let j = [1.0 - e, -a * e * s / (tau * tau)];
            let r = a * (1.0 - e) - y;
            for p in 0..2 {
                jtr[p] += j[p] * r;
                for q in 0..2 {
                    jtj[p][q] += j[p] * j[q];
                }
            }
        }
        let det = jtj[0][0] * jtj[1][1] - jtj[0][1] * jtj[1][0];
        if det.abs() < 1e-300 {
            break;
        }
        let da = -(jtj[1][1] * jtr[0] - jtj[0][1] * jtr[1]) / det;
        let dt = -(jtj[0][0] * jtr[1] - jtj[1][0] * jtr[0]) / det;
        let mut step = 1.0;
        let mut improved = false;
        while step > 1e-10 {
            let (na, nt) = (a + step * da, tau + step * dt);
            if na > 0.0 && nt > 0.0 {
                let v = sse(points, na, nt);
                if v <= cur {
                    let done = (na - a).abs() <= 1e-15 * a.abs() && (nt - tau).abs() <= 1e-15 * tau.abs();
                    a = na;
                    tau = nt;
                    improved = v < cur && !done;
                    cur = v;
                    break;
                }
            }
            step *= 0.5;
        }
        if !improved {
            break;
        }
    }
    (a, tau, cur)
}

/// Seeds for the alpha-dynamics fit.
pub const ALPHA_SEEDS: [f64; 5] = [0.1, 0.2, 0.3, 0.4, 0.5];
pub const TAU_SEEDS: [f64; 6] = [100.0, 200.0, 500.0, 1000.0, 1500.0, 2000.0];

/// Least squares over `(alpha_inf, tau)`, best of a fixed seed grid.
pub fn fit_alpha_dynamics(points: &[(f64, f64)]) -> Result<AlphaDynamics, ScalingError> {
    if points.len() < 2 {
        return Err(ScalingError::TooFewPoints { need: 2, got: points.len() });
    }
    for (i, &(s, y)) in points.iter().enumerate() {
        if !(s > 0.0 && s.is_finite() && y.is_finite()) {
            return Err(ScalingError::NonPositive { index: i });
        }
    }
    if points.iter().all(|p| p.0 == points[0].0) {
        return Err(ScalingError::Degenerate);
    }
    let mut best = (f64::NAN, f64::NAN, f64::INFINITY);
    for a in ALPHA_SEEDS {
        for tau in TAU_SEEDS {
            let r = gauss_newton(points, a, tau);
            if r.2 < best.2 {
                best = r;
            }
        }
    }
    Ok(AlphaDynamics { alpha_inf: best.0, tau: best.1 })
}

/// Piecewise-linear in `ln s` through known points, constant outside them.
#[derive(Debug, Clone, PartialEq)]
pub struct LogLinear {
    points: Vec<(f64, f64)>,
}

impl LogLinear {
    pub fn new(mut points: Vec<(f64, f64)>) -> Result<LogLinear, ScalingError> {
        if points.is_empty() {
            return Err(ScalingError::TooFewPoints { need: 1, got: 0 });
        }
        if let Some(i) = points.iter().position(|p| !(p.0 > 0.0 && p.0.is_finite() && p.1.is_finite())) {
            return Err(ScalingError::NonPositive { index: i });
        }
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        points.dedup_by(|a, b| a.0 == b.0);
        Ok(LogLinear { points })
    }

    pub fn eval(&self, s: f64) -> f64 {
        let p = &self.points;
        if s <= p[0].0 {
            return p[0].1;
        }
        let last = p[p.len() - 1];
        if s >= last.0 {
            return last.1;
        }
        let k = p.partition_point(|q| q.0 <= s);
        let (s0, y0) = p[k - 1];
        let (s1, y1) = p[k];
        let w = (s.ln() - s0.ln()) / (s1.ln() - s0.ln());
        y0 + w * (y1 - y0)
    }
}

/// Loss at wall time `t` for length `L`, with `s = gamma * t / L` steps.
pub struct EqualTimeModel {
    pub gamma: f64,
    pub a: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    pub alpha: Box<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl fmt::Debug for EqualTimeModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EqualTimeModel").field("gamma", &self.gamma).finish_non_exhaustive()
    }
}

/// Reference length for the default step rate.
pub const REFERENCE_LENGTH: f64 = 1024.0;

impl EqualTimeModel {
    /// The default rate: one step per unit time at the reference length.
    pub fn new(a: impl Fn(f64) -> f64 + Send + Sync + 'static, alpha: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        EqualTimeModel { gamma: REFERENCE_LENGTH, a: Box::new(a), alpha: Box::new(alpha) }
    }

    pub fn steps(&self, t: f64, l: f64) -> f64 {
        self.gamma * t / l
    }

    pub fn loss(&self, t: f64, l: f64) -> f64 {
        let s = self.steps(t, l);
        (self.a)(s) * l.powf(-(self.alpha)(s))
    }
}

/// When the longer length first wins on the grid, if it does.
#[derive(Debug, Clone, PartialEq)]
pub struct Crossover {
    pub shorter: f64,
    pub longer: f64,
    /// First grid time with `loss(t, longer) < loss(t, shorter)`.
    pub t: Option<f64>,
    /// The longer length stays strictly ahead from `t` to the grid end.
    pub persistent: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EqualTimeCurves {
    pub lengths: Vec<f64>,
    pub times: Vec<f64>,
    /// `losses[i][k]` is the loss of `lengths[i]` at `times[k]`.
    pub losses: Vec<Vec<f64>>,
    pub crossovers: Vec<Crossover>,
}

pub fn equal_time_curves(model: &EqualTimeModel, lengths: &[f64], times: &[f64]) -> EqualTimeCurves {
    let losses: Vec<Vec<f64>> = lengths.iter().map(|&l| times.iter().map(|&t| model.loss(t, l)).collect()).collect();
    let mut crossovers = Vec::new();
    for i in 0..lengths.len() {
        for j in 0..lengths.len() {
            if lengths[j] <= lengths[i] {
                continue;
            }
            let ahead: Vec<bool> = (0..times.len()).map(|k| losses[j][k] < losses[i][k]).collect();
            let first = ahead.iter().position(|&b| b);
            crossovers.push(Crossover {
                shorter: lengths[i],
                longer: lengths[j],
                t: first.map(|k| times[k]),
                persistent: first.is_some_and(|k| ahead[k..].iter().all(|&b| b)),
            });
        }
    }
    EqualTimeCurves { lengths: lengths.to_vec(), times: times.to_vec(), losses, crossovers }
}

/// `n` log-spaced points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => (0..n).map(|k| (lo.ln() + (hi.ln() - lo.ln()) * k as f64 / (n - 1) as f64).exp()).collect(),
    }
}

/// Model shape for forward FLOP accounting.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FlopConfig {
    /// Batch size.
    pub b: u64,
    /// Model width.
    pub d: u64,
    /// Tokens per frame before pooling.
    pub n_f: u64,
    /// Pooling stages, each halving the frame length.
    pub p: u32,
    /// Transformer blocks after the last pooling stage.
    pub l_t: u64,
    /// Main sequence length.
    pub t_s: u64,
    /// Main layers.
    pub l_s: u64,
    /// Main LSTM hidden size.
    pub h: u64,
}

impl FlopConfig {
    pub const KEYS: [&'static str; 8] = ["B", "D", "N_f", "P", "L_t", "T_s", "L_s", "H"];

    pub fn validate(&self) -> Result<(), ScalingError> {
        let fields = [self.b, self.d, self.n_f, self.p as u64, self.l_t, self.t_s, self.l_s, self.h];
        if let Some(k) = fields.iter().position(|&v| v == 0) {
            return Err(ScalingError::Config(format!("{} must be positive", Self::KEYS[k])));
        }
        if self.p >= 63 || !self.n_f.is_multiple_of(1u64 << self.p) {
            return Err(ScalingError::Config(format!("N_f={} is not divisible by 2^{}", self.n_f, self.p)));
        }
        Ok(())
    }

    /// Frame length after `stage` poolings.
    pub fn t_at(&self, stage: u32) -> u64 {
        self.n_f >> stage
    }

    /// Parses `KEY = value` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<FlopConfig, ScalingError> {
        let mut vals: [Option<u64>; 8] = [None; 8];
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |m: &str| ScalingError::Config(format!("line {}: {m}", n + 1));
            let (k, v) = line.split_once('=').ok_or_else(|| bad("expected KEY = value"))?;
            let k = k.trim();
            let idx = Self::KEYS.iter().position(|key| key.eq_ignore_ascii_case(k)).ok_or_else(|| bad(&format!("unknown key {k}")))?;
            let v: u64 = v.trim().parse().map_err(|_| bad("value is not a non-negative integer"))?;
            vals[idx] = Some(v);
        }
        let get = |i: usize| vals[i].ok_or_else(|| ScalingError::Config(format!("missing {}", Self::KEYS[i])));
        let p = u32::try_from(get(3)?).map_err(|_| ScalingError::Config("P is too large".into()))?;
        let cfg = FlopConfig { b: get(0)?, d: get(1)?, n_f: get(2)?, p, l_t: get(4)?, t_s: get(5)?, l_s: get(6)?, h: get(7)? };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_text(&self) -> String {
        format!(
            "B = {}\nD = {}\nN_f = {}\nP = {}\nL_t = {}\nT_s = {}\nL_s = {}\nH = {}\n",
            self.b, self.d, self.n_f, self.p, self.l_t, self.t_s, self.l_s, self.h
        )
    }
}

impl Default for FlopConfig {
    fn default() -> Self {
        FlopConfig { b: 512, d: 768, n_f: 7680, p: 2, l_t: 3, t_s: 1024, l_s: 2, h: 768 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Part {
    FrameHead,
    Main,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlopRow {
    pub component: String,
    pub part: Part,
    pub flops: f64,
    pub share: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlopTable {
    pub config: FlopConfig,
    pub rows: Vec<FlopRow>,
    pub frame_head: f64,
    pub main: f64,
    pub total: f64,
    /// The same subtotals from the closed-form expressions.
    pub frame_head_closed: f64,
    pub main_closed: f64,
}

fn tf_block(b: f64, t: f64, d: f64) -> f64 {
    24.0 * b * t * d * d + 4.0 * b * t * t * d
}

fn lstm(b: f64, t: f64, d: f64) -> f64 {
    16.0 * b * t * d * d
}

/// Forward FLOPs per component (one multiply-add is two FLOPs; low-order
/// elementwise terms are left out).
pub fn estimate_flops(cfg: &FlopConfig) -> Result<FlopTable, ScalingError> {
    cfg.validate()?;
    let (b, d, h, ts, ls) = (cfg.b as f64, cfg.d as f64, cfg.h as f64, cfg.t_s as f64, cfg.l_s as f64);
    let mut rows = Vec::new();
    let mut push = |component: String, part: Part, flops: f64| rows.push(FlopRow { component, part, flops, share: 0.0 });
    for stage in 0..cfg.p {
        let t = cfg.t_at(stage);
        push(format!("Frame-head TF block (T={t}) x 1"), Part::FrameHead, tf_block(b, t as f64, d));
    }
    let tp = cfg.t_at(cfg.p);
    let blocks = if cfg.l_t == 1 { "block" } else { "blocks" };
    push(
        format!("Frame-head TF {blocks} (T={tp}) x {}", cfg.l_t),
        Part::FrameHead,
        cfg.l_t as f64 * tf_block(b, tp as f64, d),
    );
    push(format!("Frame-head reduction LSTM (T={tp})"), Part::FrameHead, lstm(b, tp as f64, d));
    let layers = if cfg.l_s == 1 { "layer" } else { "layers" };
    push(
        format!("Main LSTM ({} {layers}, T={})", cfg.l_s, cfg.t_s),
        Part::Main,
        ls * 8.0 * b * ts * (d * h + h * h),
    );
    push(format!("Main MLP ({} {layers}, T={})", cfg.l_s, cfg.t_s), Part::Main, ls * 16.0 * b * ts * d * d);

    let sum = |part: Part| rows.iter().filter(|r| r.part == part).map(|r| r.flops).sum::<f64>();
    let frame_head = sum(Part::FrameHead);
    let main = sum(Part::Main);
    let total = frame_head + main;
    for r in &mut rows {
        r.share = r.flops / total;
    }

    let (nf, lt) = (cfg.n_f as f64, cfg.l_t as f64);
    let q = 4f64.powi(-(cfg.p as i32));
    let half = 2f64.powi(-(cfg.p as i32));
    let frame_head_closed =
        b * d * nf * nf * (16.0 / 3.0 * (1.0 - q) + 4.0 * lt * q) + b * d * d * nf * (48.0 + (24.0 * lt - 32.0) * half);
    let main_closed = ls * (8.0 * b * ts * (d * h + h * h) + 16.0 * b * ts * d * d);
    Ok(FlopTable { config: *cfg, rows, frame_head, main, total, frame_head_closed, main_closed })
}

impl FlopTable {
    pub fn frame_head_share(&self) -> f64 {
        self.frame_head / self.total
    }

    pub fn main_share(&self) -> f64 {
        self.main / self.total
    }

    /// Aligned text table.
    pub fn render(&self) -> String {
        let mut lines: Vec<(String, String, String)> = vec![("Component".into(), "FLOPs".into(), "Share".into())];
        for r in &self.rows {
            lines.push((r.component.clone(), sci(r.flops), pct(r.share)));
        }
        lines.push(("Frame-head subtotal".into(), sci(self.frame_head), pct(self.frame_head_share())));
        lines.push(("Main sequence subtotal".into(), sci(self.main), pct(self.main_share())));
        lines.push(("Overall total".into(), sci(self.total), pct(1.0)));
        let w0 = lines.iter().map(|l| l.0.chars().count()).max().unwrap_or(0);
        let w1 = lines.iter().map(|l| l.1.len()).max().unwrap_or(0);
        let w2 = lines.iter().map(|l| l.2.len()).max().unwrap_or(0);
        let rule = "-".repeat(w0 + w1 + w2 + 4);
        let mut out = String::new();
        for (i, (a, b, c)) in lines.iter().enumerate() {
            if i == 1 || i == self.rows.len() + 1 || i == self.rows.len() + 3 {
                out.push_str(&rule);
                out.push('\n');
            }
            out.push_str(&format!("{a:<w0$}  {b:>w1$}  {c:>w2$}\n"));
        }
        out
    }

    /// `key=value` lines.
    pub fn key_values(&self) -> String {
        let mut out = String::new();
        for (i, r) in self.rows.iter().enumerate() {
            out.push_str(&format!("row{i}.component={}\nrow{i}.flops={:e}\nrow{i}.share={}\n", r.component, r.flops, r.share));
        }
        out.push_str(&format!(
            "frame_head={:e}\nmain={:e}\ntotal={:e}\nframe_head_share={}\nmain_share={}\nframe_head_closed={:e}\nmain_closed={:e}\n",
            self.frame_head,
            self.main,
            self.total,
            self.frame_head_share(),
            self.main_share(),
            self.frame_head_closed,
            self.main_closed
        ));
        out
    }
}

fn sci(x: f64) -> String {
    format!("{x:.4e}")
}

fn pct(x: f64) -> String {
    format!("{:.2}%", 100.0 * x)
}

/// Parses `x y` pairs, one per line; `#` starts a comment, commas count as
/// whitespace.
pub fn parse_points(text: &str) -> Result<Vec<(f64, f64)>, String> {
    let mut out = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").replace(',', " ");
        let fields: Vec<&str> = line.split_whitespace().collect();
        match fields.as_slice() {
            [] => {}
            [x, y] => {
                let p = |s: &str| s.parse::<f64>().map_err(|_| format!("line {}: bad number {s:?}", n + 1));
                out.push((p(x)?, p(y)?));
            }
            _ => return Err(format!("line {}: expected two numbers", n + 1)),
        }
    }
    Ok(out)
}
