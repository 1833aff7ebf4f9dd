use std::fmt::Write as _;
use std::path::Path;

use crate::strategies::StrategyKind;
use crate::time::Seconds;

use super::{cmd_evaluate, cmd_generate, CliError, EvaluateOptions, Exit, RunConfig, SWEEP_FILE};

/// Strategies compared by a sweep, in column order.
pub const SWEEP_KINDS: [StrategyKind; 3] = [StrategyKind::Stateless, StrategyKind::Feedback, StrategyKind::Realtime];

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub step: Seconds,
    /// Mean agreement per strategy, in [`SWEEP_KINDS`] order.
    pub alignment: [f64; 3],
}

impl SweepRow {
    pub fn avg(&self) -> f64 {
        self.alignment.iter().sum::<f64>() / self.alignment.len() as f64
    }
}

pub fn format_table(rows: &[SweepRow]) -> String {
    let mut s = String::from("step\tstateless\tfeedback\treal-time\tavg\n");
    for r in rows {
        let [a, b, c] = r.alignment;
        let _ = writeln!(s, "{}\t{a:.3}\t{b:.3}\t{c:.3}\t{:.3}", r.step, r.avg());
    }
    s
}

/// Generates and evaluates every strategy at every step, writing runs under `<out>/step-<N>/<strategy>/`.
pub fn cmd_sweep(base: &RunConfig, steps: &[Seconds], refs: &Path, scorer: &str) -> Result<Vec<SweepRow>, CliError> {
    if steps.is_empty() {
        return Err(CliError::config("no steps given"));
    }
    if let Some(s) = steps.iter().find(|s| s.get() <= 0.0) {
        return Err(CliError::config(format!("step {s} must be positive")));
    }
    let opts = EvaluateOptions {
        scorer: scorer.to_string(),
        language: base.strategy.language,
        rate_model: base.strategy.rate_model.clone(),
        out: None,
    };
    let mut rows = Vec::new();
    for &step in steps {
        let mut alignment = [0.0; 3];
        for (slot, kind) in alignment.iter_mut().zip(SWEEP_KINDS) {
            let mut cfg = base.clone();
            cfg.strategy.kind = kind;
            cfg.strategy.step = step;
            cfg.strategy.icl_shots = 0;
            cfg.out = base.out.join(format!("step-{step}")).join(kind.tag());
            let summary = cmd_generate(&cfg)?;
            if summary.exit() != Exit::Success {
                return Err(CliError {
                    exit: summary.exit(),
                    message: format!("{kind} at step {step}: {}", summary.problems().join("; ")),
                });
            }
            *slot = cmd_evaluate(&cfg.out, refs, &opts)?.alignment;
        }
        rows.push(SweepRow { step, alignment });
    }
    std::fs::create_dir_all(&base.out).map_err(|e| CliError::config(format!("{}: {e}", base.out.display())))?;
    let table = base.out.join(SWEEP_FILE);
    std::fs::write(&table, format_table(&rows)).map_err(|e| CliError::config(format!("{}: {e}", table.display())))?;
    Ok(rows)
}
