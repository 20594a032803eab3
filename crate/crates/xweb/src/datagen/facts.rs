//! Fact stream generation.
//!
//! Conceptually the generator walks the full customer x part x supplier x day
//! product (customer outermost, day innermost) and keeps each combination
//! with probability D. Walking the product literally is infeasible for tiny
//! densities over large products, so the walk is realised by geometric gap
//! sampling over the linearised combination index: the gap between successive
//! kept combinations under i.i.d. Bernoulli(D) trials is geometric, so the
//! emitted set follows the exact same law with O(expected facts) work.

use rand::seq::SliceRandom;
use rand::Rng;

use super::{skewed_random_with, DatagenError, DimensionSet, GenParams, SkewConfig};
use crate::datagen::CategoryAssignment;
use crate::fact::{Fact, Slot};

/// Consumer of the generated fact stream.
pub trait FactSink {
    fn consume(&mut self, fact: &Fact) -> std::io::Result<()>;
}

/// Collects facts in memory.
impl FactSink for Vec<Fact> {
    fn consume(&mut self, fact: &Fact) -> std::io::Result<()> {
        self.push(fact.clone());
        Ok(())
    }
}

/// What the generator did: counts match the emitted stream exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct FactGenStats {
    /// Size of the candidate Cartesian product.
    pub candidates: u128,
    pub facts_emitted: u64,
    /// Total slots nulled across all emitted facts.
    pub slots_nulled: u64,
    /// Emitted facts whose final slot order is not the canonical one.
    pub facts_reordered: u64,
}

/// Gap to the next kept candidate under Bernoulli(d) retention: geometric
/// with success probability d. `u128::MAX` stands in for "past any product".
fn geometric_gap<R: Rng + ?Sized>(rng: &mut R, d: f64) -> u128 {
    if d >= 1.0 {
        return 0;
    }
    let u: f64 = rng.random();
    // floor(ln(1-u) / ln(1-d)), computed via ln_1p for small d.
    let gap = ((-u).ln_1p() / (-d).ln_1p()).floor();
    if gap.is_finite() && gap < u128::MAX as f64 {
        gap as u128
    } else {
        u128::MAX
    }
}

/// Generates facts with the default measure skew. See [`generate_facts_with`].
pub fn generate_facts<R: Rng + ?Sized>(
    dims: &DimensionSet,
    assign: &CategoryAssignment,
    gp: &GenParams,
    rng: &mut R,
    sink: &mut dyn FactSink,
) -> Result<FactGenStats, DatagenError> {
    generate_facts_with(dims, assign, gp, &SkewConfig::default(), rng, sink)
}

/// Generates the fact stream into `sink`.
///
/// Per emitted fact the draws are, in order: quantity (skewed), six
/// missing-value trials, one reorder trial, then the permutation shuffle when
/// the reorder trial fires — so the stream is a deterministic function of
/// `(dims, gp, rng)`.
pub fn generate_facts_with<R: Rng + ?Sized>(
    dims: &DimensionSet,
    assign: &CategoryAssignment,
    gp: &GenParams,
    skew: &SkewConfig,
    rng: &mut R,
    sink: &mut dyn FactSink,
) -> Result<FactGenStats, DatagenError> {
    gp.validate()?;
    skew.validate()?;
    if assign.part_count() != dims.parts.len() {
        return Err(DatagenError::Inconsistent(format!(
            "assignment covers {} parts but the dimension set has {}",
            assign.part_count(),
            dims.parts.len()
        )));
    }
    let n_days = dims.calendar.days.len() as u128;
    let n_suppliers = dims.suppliers.len() as u128;
    let n_parts = dims.parts.len() as u128;
    let mut stats = FactGenStats { candidates: dims.candidate_combinations(), ..Default::default() };

    let mut index: u128 = 0;
    loop {
        index = match index.checked_add(geometric_gap(rng, gp.density)) {
            Some(i) if i < stats.candidates => i,
            _ => break,
        };

        // Unravel the linear index; day varies fastest, customer slowest.
        let day = &dims.calendar.days[(index % n_days) as usize];
        let rest = index / n_days;
        let supplier = &dims.suppliers[(rest % n_suppliers) as usize];
        let rest = rest / n_suppliers;
        let part = &dims.parts[(rest % n_parts) as usize];
        let customer = &dims.customers[(rest / n_parts) as usize];

        let quantity = skewed_random_with(skew, rng, 1, 10_000)?;
        let total_cents = quantity * part.retailprice_cents;
        let mut fact = Fact::new(
            Some(customer.key),
            Some(part.key),
            Some(supplier.key),
            Some(day.key),
            Some(quantity),
            Some(total_cents),
        );
        for slot in Slot::ALL {
            if rng.random::<f64>() < gp.p_missing {
                fact.set(slot, None);
                stats.slots_nulled += 1;
            }
        }
        if rng.random::<f64>() < gp.p_reorder {
            fact.slot_order.shuffle(rng);
        }
        if fact.slot_order != Slot::ALL {
            stats.facts_reordered += 1;
        }

        sink.consume(&fact).map_err(|source| DatagenError::Sink { emitted: stats.facts_emitted, source })?;
        stats.facts_emitted += 1;
        index += 1;
    }
    Ok(stats)
}
