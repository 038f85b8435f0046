//! End-to-end path: simulated trace → front-end bits → NLFSR expansion.

use crate::bits::BitStream;
use crate::chain::{run_chain, ChainConfig};
use crate::error::Result;
use crate::nlfsr::{expand, seed_demand, ExpandConfig, ExpandStats};
use crate::sim::{simulate, SimParams};

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    /// Bits straight from the comparator, used as the expander seed.
    pub raw: BitStream,
    pub expanded: BitStream,
    pub stats: ExpandStats,
    /// Simulation steps actually run.
    pub steps: usize,
}

/// Simulation steps needed so the front end yields exactly `raw_bits` bits.
pub fn steps_for_raw_bits(raw_bits: usize, chain: &ChainConfig) -> usize {
    raw_bits * chain.decimation
}

/// Produces `n_out` expanded bits. `sim.n_steps` is overridden with the
/// number of steps the expander's seed demand requires.
pub fn generate(sim: &SimParams, chain: &ChainConfig, expander: &ExpandConfig, n_out: usize) -> Result<PipelineOutput> {
    expander.validate()?;
    let need = seed_demand(expander.spec.width(), expander.reseed_interval, n_out);
    let steps = steps_for_raw_bits(need, chain);
    let params = SimParams { n_steps: steps, ..sim.clone() };
    let trace = simulate(&params)?;
    let raw = run_chain(&trace, chain)?.bits;
    let (expanded, stats) = expand(&raw, &expander.spec, expander.reseed_interval, n_out)?;
    Ok(PipelineOutput { raw, expanded, stats, steps })
}

/// Raw front-end bits only, no expansion.
pub fn raw_bits(sim: &SimParams, chain: &ChainConfig, n_bits: usize) -> Result<BitStream> {
    let params = SimParams { n_steps: steps_for_raw_bits(n_bits, chain), ..sim.clone() };
    Ok(run_chain(&simulate(&params)?, chain)?.bits)
}
