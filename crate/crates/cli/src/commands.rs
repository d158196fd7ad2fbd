use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use isoratio::lemma_oracle::{random_search_counterexample, Exponent, SearchReport};
use isoratio::profile::{liminf_profile_ratio, LiminfEstimate};
use isoratio::ratios::{
    check_theorem_ste4, check_theorem_ste5, minimize_iflat, minimize_istar, ordering_check, ratio_curve,
    HypothesisReport, RatioError,
};
use isoratio::warped_geometry::{check_conditions, Condition, ConditionsReport, Family, SurfaceOfRevolution};

use crate::config::{SurfaceConfig, ToleranceOverrides};
use crate::{Cli, CliError, Command, Exit, Which, OUT_DIR_ENV};

pub const SWEEP_HEADER: &str = "V,profile,iflat,istar,candidate_kind,t";
pub const MIN_SWEEP_GRID: usize = 16;
const CURVATURE_SAMPLES: usize = 8;
const ORDERING_GRID: usize = 256;

/// Plain-text report with `PASS`/`FAIL`/`INFO` line prefixes.
#[derive(Debug, Default, Clone, PartialEq)]
pub struct Report {
    text: String,
    failed: bool,
}

impl Report {
    pub fn info(&mut self, msg: impl AsRef<str>) {
        let _ = writeln!(self.text, "INFO {}", msg.as_ref());
    }

    pub fn check(&mut self, ok: bool, item: impl AsRef<str>) {
        let tag = if ok { "PASS" } else { "FAIL" };
        let _ = writeln!(self.text, "{tag} {}", item.as_ref());
        self.failed |= !ok;
    }

    pub fn failed(&self) -> bool {
        self.failed
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    fn finish(self) -> Outcome {
        Outcome {
            exit: if self.failed { Exit::Hypothesis } else { Exit::Ok },
            report: self.text,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub exit: Exit,
    pub report: String,
}

pub fn execute(cli: &Cli) -> Result<Outcome, CliError> {
    let tol = cli.tolerance_overrides();
    match &cli.command {
        Command::Describe { config } => {
            let (_, s) = load(config, tol)?;
            Ok(describe(&s))
        }
        Command::Sweep {
            config,
            grid,
            at_fraction,
        } => {
            let (cfg, s) = load(config, tol)?;
            let volumes = sweep_grid(&s, *grid, at_fraction)?;
            let path = sweep_path(cli.out.as_deref(), &cfg.surface.name);
            let table = sweep_table(&s, &volumes)?;
            std::fs::write(&path, &table).map_err(|source| CliError::Io {
                path: path.display().to_string(),
                source,
            })?;
            let mut r = Report::default();
            r.info(format!("wrote {} rows to {}", volumes.len(), path.display()));
            Ok(r.finish())
        }
        Command::Minimize { config, which } => {
            let (_, s) = load(config, tol)?;
            minimize(&s, *which)
        }
        Command::Verify { config } => {
            let (_, s) = load(config, tol)?;
            Ok(verify(&s))
        }
        Command::Lemmas {
            p,
            trials,
            seed,
            conjecture,
        } => lemmas(*p, *trials, *seed, *conjecture),
    }
}

pub fn load(path: &Path, tol: ToleranceOverrides) -> Result<(SurfaceConfig, SurfaceOfRevolution), CliError> {
    let cfg = SurfaceConfig::load(path)?;
    let s = cfg.build(&path.display().to_string(), tol)?;
    Ok((cfg, s))
}

fn numerics(e: impl std::fmt::Display) -> CliError {
    CliError::Numerics(e.to_string())
}

fn family_label(f: &Family) -> String {
    match f {
        Family::ExpCusp(c) => format!("exp_cusp(t1 = {}, rate = {})", c.t1(), c.rate()),
        Family::PowerCusp { a } => format!("power_cusp(a = {a})"),
        other => other.tag().to_string(),
    }
}

fn report_conditions(r: &mut Report, c: &ConditionsReport) {
    for cond in [Condition::J, Condition::Jj, Condition::Jjj, Condition::Jv, Condition::V] {
        let witnesses: Vec<String> = c
            .witnesses_for(cond)
            .map(|w| format!("(t = {:e}, {:e})", w.t, w.value))
            .collect();
        r.check(
            c.holds(cond),
            format!("condition ({cond}) witnesses {}", witnesses.join(" ")),
        );
    }
}

pub fn describe(s: &SurfaceOfRevolution) -> Outcome {
    let mut r = Report::default();
    let w = s.warping();
    r.info(format!("family {} n = {}", family_label(w.family()), s.n()));
    r.info(format!("total volume A = {:e}", s.total_volume()));
    let c = check_conditions(s);
    match c.t1 {
        Some(t1) => r.info(format!("t1 = {t1:e} (f' changes sign)")),
        None => r.info("t1 undefined"),
    }
    let from = c.t1.unwrap_or(0.0).max(w.asymptotic_start());
    for k in 0..CURVATURE_SAMPLES {
        let t = from + 0.5 + k as f64;
        match s.curvature(t) {
            Ok(kt) => r.info(format!("K({t:e}) = {kt:e}")),
            Err(e) => r.info(format!("K({t:e}) unavailable: {e}")),
        }
    }
    report_conditions(&mut r, &c);
    r.finish()
}

pub fn sweep_grid(s: &SurfaceOfRevolution, grid: usize, fractions: &[f64]) -> Result<Vec<f64>, CliError> {
    let a = s.total_volume();
    if !fractions.is_empty() {
        if let Some(f) = fractions.iter().find(|f| !(**f > 0.0 && **f < 1.0)) {
            return Err(CliError::Usage(format!("--at-fraction must lie in ]0, 1[, got {f}")));
        }
        if fractions.windows(2).any(|w| w[1] <= w[0]) {
            return Err(CliError::Usage(
                "--at-fraction values must be strictly increasing".into(),
            ));
        }
        return Ok(fractions.iter().map(|f| f * a).collect());
    }
    if grid < MIN_SWEEP_GRID {
        return Err(CliError::Usage(format!(
            "--grid must be at least {MIN_SWEEP_GRID}, got {grid}"
        )));
    }
    Ok((0..grid).map(|i| a * (i as f64 + 0.5) / grid as f64).collect())
}

fn sweep_path(out: Option<&Path>, name: &str) -> PathBuf {
    if let Some(p) = out {
        return p.to_path_buf();
    }
    let stem: String = name
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect();
    let dir = std::env::var_os(OUT_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("."));
    dir.join(format!("{stem}-sweep.csv"))
}

/// The CSV table for `volumes`; floats are written in shortest round-trip
/// scientific notation.
pub fn sweep_table(s: &SurfaceOfRevolution, volumes: &[f64]) -> Result<String, CliError> {
    let points = ratio_curve(s, volumes).map_err(numerics)?;
    let mut out = String::with_capacity(96 * (points.len() + 1));
    out.push_str(SWEEP_HEADER);
    out.push('\n');
    for p in points {
        let t = p.best.radius().unwrap_or(f64::NAN);
        let _ = writeln!(
            out,
            "{:e},{:e},{:e},{:e},{},{:e}",
            p.volume,
            p.best.perimeter,
            p.iflat,
            p.istar,
            p.best.kind.label(),
            t
        );
    }
    Ok(out)
}

pub fn minimize(s: &SurfaceOfRevolution, which: Which) -> Result<Outcome, CliError> {
    let res = match which {
        Which::Iflat => minimize_iflat(s),
        Which::Istar => minimize_istar(s),
    };
    let mut r = Report::default();
    match res {
        Ok(c) => {
            r.info(format!("V0 = {:e}", c.volume));
            r.info(format!("value = {:e}", c.value));
            r.info(format!("t0 = {:e}", c.radius));
            r.info(format!("candidate = {}", c.best.kind.label()));
            r.info(format!("interior margin = {:e}", c.interior_margin));
            r.check(true, "interior minimum");
        }
        Err(RatioError::BoundaryMinimum { volume, value }) => {
            r.info(format!("search edge V = {volume:e}, value = {value:e}"));
            r.check(
                false,
                "interior minimum: ratio still decreasing at the end of the search",
            );
        }
        Err(e) => return Err(numerics(e)),
    }
    Ok(r.finish())
}

fn describe_limit(name: &str, l: &LiminfEstimate) -> String {
    if l.diverges {
        format!("{name} = inf (diverges)")
    } else {
        let cf = l
            .closed_form
            .map(|c| format!(", closed form {c:e}"))
            .unwrap_or_default();
        let settled = if l.stable { "" } else { " (lower estimate)" };
        format!("{name} = {:e}{settled}{cf}", l.value)
    }
}

fn report_hypotheses(r: &mut Report, h: &HypothesisReport, flat: bool) {
    let (c_name, inf_name) = if flat { ("C1", "I-flat") } else { ("C2", "I-star") };
    r.info(describe_limit(c_name, &h.limit));
    match &h.certificate {
        Some(c) => {
            r.info(format!("{inf_name} = {:e}", c.value));
            r.info(format!(
                "minimiser V0 = {:e}, t0 = {:e}, candidate = {}",
                c.volume,
                c.radius,
                c.best.kind.label()
            ));
        }
        None => {
            if let Some((v, value)) = h.boundary_minimum {
                r.info(format!(
                    "{inf_name} approached at the search edge V = {v:e}, value {value:e}"
                ));
            }
        }
    }
}

pub fn verify(s: &SurfaceOfRevolution) -> Outcome {
    let mut r = Report::default();
    r.info(format!("total volume A = {:e}", s.total_volume()));
    let c = check_conditions(s);
    report_conditions(&mut r, &c);

    match check_theorem_ste4(s) {
        Ok(h) => {
            report_hypotheses(&mut r, &h, true);
            r.check(h.cond_i_holds, format!("cond (i): {}", describe_limit("C1", &h.limit)));
            r.check(
                h.cond_ii_holds,
                format!(
                    "cond (ii): I-flat = {:e} below C1 with an interior minimiser",
                    h.inf_value
                ),
            );
            match &h.constants {
                Some(k) => r.check(
                    k.chain_holds(),
                    format!(
                        "equality chain I-flat = C = D: {:e} {:e} {:e} (spread {:e})",
                        k.minimum,
                        k.c,
                        k.d,
                        k.spread()
                    ),
                ),
                None => r.check(false, "equality chain: no interior minimiser"),
            }
        }
        Err(e) => r.check(false, format!("flat ratio hypotheses: {e}")),
    }

    let a = s.total_volume();
    let grid: Vec<f64> = (0..ORDERING_GRID)
        .map(|i| a * (i as f64 + 0.5) / ORDERING_GRID as f64)
        .collect();
    match ordering_check(s, &grid) {
        Ok(o) => r.check(
            true,
            format!(
                "orderings on {ORDERING_GRID} volumes: sharp slack {:e}, star slack {:e}",
                o.sharp_slack, o.star_slack
            ),
        ),
        Err(e) => r.check(false, format!("orderings: {e}")),
    }

    // the starred constant tends to zero on exponential-type cusps, so this
    // part is reported without a verdict
    match check_theorem_ste5(s) {
        Ok(h) => {
            report_hypotheses(&mut r, &h, false);
            r.info(format!("starred hypotheses hold: {}", h.hypotheses_hold()));
        }
        Err(e) => r.info(format!("starred ratio: {e}")),
    }
    r.finish()
}

/// Only the small-volume constant; cheaper than [`verify`].
pub fn small_volume_constant(s: &SurfaceOfRevolution) -> Result<LiminfEstimate, CliError> {
    liminf_profile_ratio(s, 1.0).map_err(numerics)
}

pub fn lemma_exponent(p: f64, conjecture: bool) -> Result<Exponent, CliError> {
    if p == 1.0 {
        Ok(Exponent::One)
    } else if p == 2.0 {
        Ok(Exponent::Two)
    } else if conjecture {
        Exponent::conjecture(p).map_err(|e| CliError::Usage(e.to_string()))
    } else {
        Err(CliError::Usage(format!(
            "--p {p} is outside the proven cases 1 and 2; pass --conjecture to run it anyway"
        )))
    }
}

pub fn lemmas(p: f64, trials: u64, seed: u64, conjecture: bool) -> Result<Outcome, CliError> {
    let exponent = lemma_exponent(p, conjecture)?;
    if trials == 0 {
        return Err(CliError::Usage("--trials must be at least 1".into()));
    }
    let rep = random_search_counterexample(exponent, trials, seed).map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(lemma_report(&rep).finish())
}

fn lemma_report(rep: &SearchReport) -> Report {
    let mut r = Report::default();
    let p = rep.exponent.value();
    if !rep.exponent.is_proven() {
        r.info(format!("p = {p} is a conjecture, not a proven case"));
    }
    r.info(format!("p = {p}, trials = {}, seed = {}", rep.trials, rep.seed));
    r.info(format!("min margin = {:e}", rep.min_margin));
    r.info(format!("min relative margin = {:e}", rep.min_relative_margin));
    let [l1, l2, a1, a2, a3] = rep.argmin.fields();
    r.info(format!(
        "argmin L1 = {l1:e}, L2 = {l2:e}, A1 = {a1:e}, A2 = {a2:e}, A3 = {a3:e}"
    ));
    if let Some(v) = rep.first_violation {
        r.info(format!("first violation {:?}", v.fields()));
    }
    r.check(
        rep.violations == 0,
        format!("split inequality: {} violations", rep.violations),
    );
    r
}
