use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use super::config::ScenarioConfig;
use super::format::num;
use super::{CliError, SolveFor, SweepParam};
use crate::distributions::ArrivalDistribution;
use crate::engine::{self, EngineError, FormulaVariant};
use crate::mcsim;
use crate::model::{EvalBreakdown, Scenario, StrategyKind};

/// z-scores beyond this count as disagreement with simulation.
pub const AGREEMENT_SIGMAS: f64 = 4.0;

pub const SWEEP_HEADER: [&str; 8] =
    ["param", "value", "variant", "total", "p_board", "p_missed_early", "p_no_bus", "recommended"];

/// A one-parameter grid, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSpec {
    pub param: SweepParam,
    pub from: f64,
    pub to: f64,
    pub steps: usize,
}

impl SweepSpec {
    pub fn new(param: SweepParam, from: f64, to: f64, steps: usize) -> Result<Self, CliError> {
        let mut problems = Vec::new();
        if !(from < to) {
            problems.push(format!("sweep needs from < to (got {from}, {to})"));
        }
        if steps < 2 {
            problems.push(format!("sweep needs steps >= 2 (got {steps})"));
        }
        if problems.is_empty() {
            Ok(Self { param, from, to, steps })
        } else {
            Err(CliError::Validation(problems))
        }
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        let last = (self.steps - 1) as f64;
        (0..self.steps).map(move |i| {
            if i == self.steps - 1 {
                self.to
            } else {
                self.from + (self.to - self.from) * i as f64 / last
            }
        })
    }

    /// Scenario and arrival law at one grid point.
    pub fn apply(
        &self,
        s: &Scenario,
        dist: &ArrivalDistribution,
        value: f64,
    ) -> Result<(Scenario, ArrivalDistribution), CliError> {
        let model = |r: Result<Scenario, crate::model::ModelError>| r.map_err(|e| CliError::Validation(vec![e.to_string()]));
        Ok(match self.param {
            SweepParam::Tw => (model(s.with_tw(value))?, *dist),
            SweepParam::D2 => (model(s.with_d2(value))?, *dist),
            SweepParam::Vb => (model(s.with_vb(value))?, *dist),
            SweepParam::Vw => (model(s.with_vw(value))?, *dist),
            SweepParam::Tb => {
                let d = ArrivalDistribution::uniform(0.0, value).map_err(|e| CliError::Validation(vec![e.to_string()]))?;
                (*s, d)
            }
        })
    }
}

/// Standardised distance between a formula value and a simulated mean. A
/// zero standard error gives 0 on agreement to 1e-12 and infinity otherwise.
pub fn z_score(total: f64, mean: f64, stderr: f64) -> f64 {
    let diff = total - mean;
    if stderr > 0.0 {
        diff / stderr
    } else if diff.abs() <= 1e-12 * mean.abs().max(1.0) {
        0.0
    } else {
        diff.signum() * f64::INFINITY
    }
}

fn write_breakdown(out: &mut dyn Write, b: &EvalBreakdown) -> io::Result<()> {
    writeln!(out, "pre_walk:       {}", num(b.pre_walk))?;
    writeln!(out, "board_term:     {}", num(b.board_term))?;
    writeln!(out, "fallback_term:  {}", num(b.fallback_term))?;
    writeln!(out, "total:          {}", num(b.total))?;
    writeln!(out, "p_board:        {}", num(b.p_board))?;
    writeln!(out, "p_missed_early: {}", num(b.p_missed_early))?;
    writeln!(out, "p_no_bus:       {}", num(b.p_no_bus))?;
    if b.out_of_support {
        writeln!(out, "warning: literal formula integrated 1/t_b beyond its support (tw > t_b)")?;
    }
    Ok(())
}

pub fn eval(cfg: &ScenarioConfig, variant: FormulaVariant, csv: bool, out: &mut dyn Write) -> Result<u8, CliError> {
    let s = &cfg.scenario;
    let b = engine::evaluate(s, &cfg.dist, variant)?;
    if csv {
        eprintln!("config: {}", cfg.echo());
        let mut w = csv_writer(out);
        w.write_record(["variant", "pre_walk", "board_term", "fallback_term", "total", "p_board", "p_missed_early", "p_no_bus"])?;
        w.write_record([
            variant.name().to_string(),
            num(b.pre_walk),
            num(b.board_term),
            num(b.fallback_term),
            num(b.total),
            num(b.p_board),
            num(b.p_missed_early),
            num(b.p_no_bus),
        ])?;
        w.flush()?;
        return Ok(0);
    }
    writeln!(out, "config: {}", cfg.echo())?;
    writeln!(out, "variant: {variant}")?;
    write_breakdown(out, &b)?;
    if variant == FormulaVariant::OriginalEq4 {
        writeln!(out, "rhs (d-d2)/vw:  {}", num(s.derive().walk_rest))?;
    }
    Ok(0)
}

pub fn compare(cfg: &ScenarioConfig, gate: FormulaVariant, out: &mut dyn Write) -> Result<u8, CliError> {
    let s = &cfg.scenario;
    let mc = mcsim::run_mc(s, StrategyKind::WalkThenWait, &cfg.dist, cfg.trials, cfg.seed);
    writeln!(out, "config: {}", cfg.echo())?;
    writeln!(
        out,
        "monte carlo walk-then-wait: mean {} stderr {} ({} trials, seed {})",
        num(mc.mean),
        num(mc.stderr),
        mc.trials,
        cfg.seed
    )?;
    writeln!(out, "{:<20} {:>20} {:>20}", "variant", "total", "z")?;
    let mut gate_z = None;
    for variant in FormulaVariant::ALL {
        match engine::evaluate(s, &cfg.dist, variant) {
            Ok(b) => {
                let z = z_score(b.total, mc.mean, mc.stderr);
                writeln!(out, "{:<20} {:>20} {:>20}", variant.name(), num(b.total), num(z))?;
                if variant == gate {
                    gate_z = Some(z);
                }
            }
            Err(EngineError::VariantRequiresUniform(_)) => {
                writeln!(out, "{:<20} {:>20} {:>20}", variant.name(), "n/a", "n/a")?;
            }
            Err(e) => return Err(e.into()),
        }
    }
    let z = match gate_z {
        Some(z) => z,
        None => return Err(EngineError::VariantRequiresUniform(cfg.dist).into()),
    };
    let agrees = z.abs() <= AGREEMENT_SIGMAS;
    writeln!(
        out,
        "gate {gate}: |z| = {} {} {AGREEMENT_SIGMAS}: {}",
        num(z.abs()),
        if agrees { "<=" } else { ">" },
        if agrees { "agrees with simulation" } else { "disagrees with simulation" }
    )?;
    Ok(if agrees { 0 } else { 3 })
}

fn csv_writer(out: &mut dyn Write) -> csv::Writer<&mut dyn Write> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out)
}

/// Writes the sweep table to `w`; returns (rows written, grid points skipped).
pub fn write_sweep(cfg: &ScenarioConfig, spec: &SweepSpec, w: &mut dyn Write) -> Result<(usize, usize), CliError> {
    let mut csv = csv_writer(w);
    csv.write_record(SWEEP_HEADER)?;
    let (mut rows, mut skipped) = (0, 0);
    for value in spec.values() {
        let (s, dist) = match spec.apply(&cfg.scenario, &cfg.dist, value) {
            Ok(p) => p,
            Err(e) => {
                eprintln!("warning: skipping {}={}: {e}", spec.param.name(), num(value));
                skipped += 1;
                continue;
            }
        };
        let recommended = engine::decide(&s, &dist)?.recommended;
        for variant in FormulaVariant::ALL {
            if variant.requires_uniform() && dist.headway().is_none() {
                continue;
            }
            let b = engine::evaluate(&s, &dist, variant)?;
            csv.write_record([
                spec.param.name().to_string(),
                num(value),
                variant.name().to_string(),
                num(b.total),
                num(b.p_board),
                num(b.p_missed_early),
                num(b.p_no_bus),
                recommended.name().to_string(),
            ])?;
            rows += 1;
        }
    }
    csv.flush()?;
    Ok((rows, skipped))
}

pub fn sweep(cfg: &ScenarioConfig, spec: &SweepSpec, path: &Path, out: &mut dyn Write) -> Result<u8, CliError> {
    if path == Path::new("-") {
        eprintln!("config: {}", cfg.echo());
        write_sweep(cfg, spec, out)?;
        return Ok(0);
    }
    let mut file = File::create(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let (rows, skipped) = write_sweep(cfg, spec, &mut file)?;
    writeln!(out, "config: {}", cfg.echo())?;
    writeln!(out, "wrote {rows} rows to {} ({skipped} grid points skipped)", path.display())?;
    Ok(0)
}

pub fn breakeven(
    cfg: &ScenarioConfig,
    solve_for: SolveFor,
    lo: Option<f64>,
    hi: Option<f64>,
    out: &mut dyn Write,
) -> Result<u8, CliError> {
    let s = &cfg.scenario;
    let (name, lo, hi) = match solve_for {
        SolveFor::Tw => ("tw", lo.unwrap_or(0.0), hi.unwrap_or_else(|| cfg.dist.effective_upper())),
        SolveFor::D2 => ("d2", lo.unwrap_or(0.0), hi.unwrap_or(s.d())),
    };
    let solved = match solve_for {
        SolveFor::Tw => engine::breakeven_tw(s, &cfg.dist, lo, hi),
        SolveFor::D2 => engine::breakeven_d2(s, &cfg.dist, lo, hi),
    };
    writeln!(out, "config: {}", cfg.echo())?;
    match solved {
        Ok(root) => {
            let residual = match solve_for {
                SolveFor::Tw => engine::indifference_in_tw(s, &cfg.dist, root)?,
                SolveFor::D2 => engine::indifference_in_d2(s, &cfg.dist, root)?,
            };
            writeln!(out, "indifference point: {name} = {}", num(root))?;
            writeln!(out, "f({name}) = {}", num(residual))?;
        }
        Err(EngineError::NoIndifference { f_lo, f_hi, dominant }) => {
            writeln!(
                out,
                "no indifference point: {dominant} dominates on bracket [{}, {}] (f(lo) = {}, f(hi) = {})",
                num(lo),
                num(hi),
                num(f_lo),
                num(f_hi)
            )?;
        }
        Err(e) => return Err(e.into()),
    }
    Ok(0)
}

pub fn residual(cfg: &ScenarioConfig, out: &mut dyn Write) -> Result<u8, CliError> {
    let s = &cfg.scenario;
    let tb = cfg
        .headway()
        .ok_or_else(|| CliError::Validation(vec!["residual needs `tb` or a uniform:0,<t_b> arrival law".into()]))?;
    let quad = engine::residual_uniform(s, tb)?;
    let closed = engine::residual_closed_form(s, tb)?;
    let sim = mcsim::run_renewal(s, tb, cfg.trials, cfg.seed)?;
    writeln!(out, "config: {}", cfg.echo())?;
    writeln!(out, "assumption d2/vw < t_b: {} < {}: ok", num(s.walk_to_stop2()), num(tb))?;
    writeln!(out, "quadrature:   {}", num(quad))?;
    writeln!(out, "closed form:  {}", num(closed))?;
    writeln!(out, "renewal overtaken frequency: {} ({} of {})", num(sim.freq_overtaken), sim.overtaken, sim.trials)?;
    match sim.extra_wait {
        Some(e) => {
            writeln!(out, "renewal extra wait | overtaken: {} +/- {}", num(e.mean), num(e.stderr))?;
            writeln!(out, "renewal extra wait x frequency: {}", num(sim.weighted_mean))?;
        }
        None => writeln!(out, "renewal extra wait | overtaken: empty (no trial overtaken)")?,
    }
    Ok(0)
}

pub fn simulate(cfg: &ScenarioConfig, strategy: StrategyKind, csv: bool, out: &mut dyn Write) -> Result<u8, CliError> {
    let st = mcsim::run_mc(&cfg.scenario, strategy, &cfg.dist, cfg.trials, cfg.seed);
    if csv {
        eprintln!("config: {}", cfg.echo());
        let mut w = csv_writer(out);
        w.write_record(["strategy", "trials", "mean", "stderr", "freq_board", "freq_missed_early", "freq_no_bus"])?;
        w.write_record([
            strategy.name().to_string(),
            st.trials.to_string(),
            num(st.mean),
            num(st.stderr),
            num(st.freq_board),
            num(st.freq_missed_early),
            num(st.freq_no_bus),
        ])?;
        w.flush()?;
        return Ok(0);
    }
    writeln!(out, "config: {}", cfg.echo())?;
    writeln!(out, "strategy: {strategy}")?;
    writeln!(out, "trials:            {}", st.trials)?;
    writeln!(out, "mean:              {}", num(st.mean))?;
    writeln!(out, "stderr:            {}", num(st.stderr))?;
    writeln!(out, "freq_board:        {}", num(st.freq_board))?;
    writeln!(out, "freq_missed_early: {}", num(st.freq_missed_early))?;
    writeln!(out, "freq_no_bus:       {}", num(st.freq_no_bus))?;
    Ok(0)
}
