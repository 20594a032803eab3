//! Analytic warehouse size estimate.
//!
//! `s_dimensions` sums member counts times average node size over all
//! dimensions (all hierarchy levels included); `s_facts` multiplies the
//! finest-level cardinalities, the density and the average fact node size.

use super::{param_err, DatagenError, GenParams};

/// Per-dimension sizing inputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DimSizeInput {
    /// Total member count across all levels of the dimension.
    pub cardinality: u64,
    /// Member count of the finest level (the one facts reference).
    pub finest_cardinality: u64,
    /// Average node size in bytes within the dimension document.
    pub nodesize: u64,
}

/// The estimate plus an echo of everything that went into it.
#[derive(Debug, Clone, PartialEq)]
pub struct SizeEstimate {
    /// Exact byte count for the dimension documents.
    pub s_dimensions: u128,
    /// Expected byte count for the fact document (density-scaled).
    pub s_facts: f64,
    /// s_dimensions + s_facts.
    pub total: f64,
    pub density: f64,
    pub inputs: Vec<DimSizeInput>,
    pub fact_size: u64,
}

/// Applies the size formulas: sum of `cardinality * nodesize` for the
/// dimension part, product of `finest_cardinality` times `density *
/// fact_size` for the fact part.
pub fn estimate_size(
    gp: &GenParams,
    dims: &[DimSizeInput],
    fact_size: u64,
) -> Result<SizeEstimate, DatagenError> {
    gp.validate()?;
    if dims.is_empty() {
        return Err(param_err("cardinalities", "at least one dimension required"));
    }
    if fact_size == 0 {
        return Err(param_err("fact_size", "must be positive"));
    }
    let mut s_dimensions: u128 = 0;
    let mut fact_base: u128 = u128::from(fact_size);
    for (i, d) in dims.iter().enumerate() {
        if d.cardinality == 0 || d.finest_cardinality == 0 || d.nodesize == 0 {
            return Err(param_err("cardinalities", format!("dimension {i} has a zero input")));
        }
        s_dimensions = s_dimensions
            .checked_add(u128::from(d.cardinality) * u128::from(d.nodesize))
            .ok_or_else(|| param_err("cardinalities", "dimension size overflows"))?;
        fact_base = fact_base
            .checked_mul(u128::from(d.finest_cardinality))
            .ok_or_else(|| param_err("cardinalities", "fact product overflows"))?;
    }
    let s_facts = fact_base as f64 * gp.density;
    Ok(SizeEstimate {
        s_dimensions,
        s_facts,
        total: s_dimensions as f64 + s_facts,
        density: gp.density,
        inputs: dims.to_vec(),
        fact_size,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn desk_inputs() -> Vec<DimSizeInput> {
        [150u64, 200, 10, 2557]
            .into_iter()
            .map(|n| DimSizeInput { cardinality: n, finest_cardinality: n, nodesize: 220 })
            .collect()
    }

    fn gp_with_density(density: f64) -> GenParams {
        GenParams { density, ..Default::default() }
    }

    #[test]
    fn reproduces_the_hand_product() {
        let est = estimate_size(&gp_with_density(1.0), &desk_inputs(), 220).unwrap();
        // Independent accumulation of the same product.
        let mut expect: u128 = 220;
        for n in [150u128, 200, 10, 2557] {
            expect *= n;
        }
        assert_eq!(expect, 168_762_000_000);
        assert_eq!(est.s_facts, 168_762_000_000.0);
        assert_eq!(est.s_dimensions, (150 + 200 + 10 + 2557) * 220);
        assert_eq!(est.total, est.s_dimensions as f64 + est.s_facts);
    }

    #[test]
    fn linear_in_density_to_machine_precision() {
        let inputs = desk_inputs();
        for d in [1e-7, 3.5e-4, 0.25] {
            let lo = estimate_size(&gp_with_density(d), &inputs, 220).unwrap();
            let hi = estimate_size(&gp_with_density(2.0 * d), &inputs, 220).unwrap();
            assert_eq!(hi.s_facts, 2.0 * lo.s_facts);
            assert_eq!(hi.s_dimensions, lo.s_dimensions);
        }
    }

    #[test]
    fn vanishing_density_leaves_dimension_size() {
        let est = estimate_size(&gp_with_density(1e-300), &desk_inputs(), 220).unwrap();
        assert!(est.s_facts < 1e-280);
        assert!((est.total - est.s_dimensions as f64).abs() < 1.0);
    }

    #[test]
    fn rejects_degenerate_inputs() {
        let gp = gp_with_density(0.5);
        assert!(estimate_size(&gp, &[], 220).is_err());
        assert!(estimate_size(&gp, &desk_inputs(), 0).is_err());
        let mut zero = desk_inputs();
        zero[1].finest_cardinality = 0;
        assert!(estimate_size(&gp, &zero, 220).is_err());
    }

    proptest! {
        #[test]
        fn strictly_monotonic_in_each_input(
            cards in proptest::collection::vec(1u64..2_000, 2..5),
            nodesize in 1u64..500,
            fact_size in 1u64..500,
            density in 1e-6f64..1.0,
            bump in 1u64..100,
        ) {
            let dims: Vec<DimSizeInput> = cards
                .iter()
                .map(|&n| DimSizeInput { cardinality: n, finest_cardinality: n, nodesize })
                .collect();
            let gp = gp_with_density(density);
            let base = estimate_size(&gp, &dims, fact_size).unwrap();

            let denser = estimate_size(&gp_with_density((density * 1.5).min(1.0)), &dims, fact_size).unwrap();
            prop_assert!(denser.total > base.total);

            let fatter = estimate_size(&gp, &dims, fact_size + bump).unwrap();
            prop_assert!(fatter.total > base.total);

            let mut grown = dims.clone();
            grown[0].cardinality += bump;
            grown[0].finest_cardinality += bump;
            let bigger = estimate_size(&gp, &grown, fact_size).unwrap();
            prop_assert!(bigger.total > base.total);
        }
    }
}
