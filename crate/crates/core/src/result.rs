use serde::Serialize;
use std::io::Write;

/// One subsampled point of an annealing trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TracePoint {
    pub step: u64,
    pub current: f64,
    pub best: f64,
    /// Temperature for thermal methods, transverse field for replica methods,
    /// the control parameter for quantum-transition search.
    pub control: f64,
}

/// Outcome of a single annealing run.
#[derive(Debug, Clone, Serialize)]
pub struct AnnealResult<C> {
    pub best_config: C,
    pub best_cost: f64,
    pub trace: Vec<TracePoint>,
    pub accepted_moves: u64,
    /// Accepted moves with a strictly positive cost change.
    pub uphill_accepted: u64,
    /// Cost-function evaluations, counting incremental deltas as one each.
    pub evaluations: u64,
    /// Tunnelling restarts performed (quantum-transition search only).
    pub tunnel_jumps: u64,
}

impl<C> AnnealResult<C> {
    /// Writes the trace as `step,current,best,control` CSV.
    pub fn write_trace_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "step,current,best,control")?;
        for p in &self.trace {
            writeln!(out, "{},{},{},{}", p.step, p.current, p.best, p.control)?;
        }
        Ok(())
    }
}

/// Upper bound on retained trace points per run.
pub(crate) const MAX_TRACE_POINTS: u64 = 10_000;

/// Stride that keeps a trace of `steps` points under [`MAX_TRACE_POINTS`].
pub(crate) fn trace_stride(steps: u64) -> u64 {
    steps.div_ceil(MAX_TRACE_POINTS).max(1)
}
