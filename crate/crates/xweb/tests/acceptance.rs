//! Acceptance gate: one test per numbered criterion. Each prints exactly one
//! `criterion N (<name>): pass|FAIL` line with the measured values, and fails
//! honestly when its tolerance is exceeded.
//!
//! Tolerances are pinned here, next to each check, not in the library.

use std::time::Duration;

use xweb::bench::{
    compute_stats, load_test, performance_test, verify_backend, CannedResponse, EnvInfo,
    HttpDriver, HttpDriverConfig, MockBackend, ReferenceDriver, Stats, Verdict,
};
use xweb::codec::{emit_warehouse, parse_warehouse};
use xweb::datagen::{
    assign_categories, estimate_size, generate_dimensions, generate_facts, stage_rng,
    DimSizeInput, FactSink, GenParams, GenStage,
};
use xweb::engine::oracle::evaluate_oracle;
use xweb::engine::{evaluate, QueryResult};
use xweb::fact::{Fact, Slot};
use xweb::taxonomy::{level_of, CategoryTaxonomy};
use xweb::value::Value;
use xweb::warehouse::{generate_warehouse, Warehouse};
use xweb::workload::{all_queries, query_spec, QueryId, WorkloadConfig};

/// Prints the single verdict line for a criterion and panics on failure.
fn conclude(n: u8, name: &str, outcome: Result<String, String>) {
    match outcome {
        Ok(detail) => println!("criterion {n} ({name}): pass — {detail}"),
        Err(detail) => {
            println!("criterion {n} ({name}): FAIL — {detail}");
            panic!("criterion {n} ({name}) failed: {detail}");
        }
    }
}

/// Discards the stream; only the generation statistics are of interest.
struct NullSink;

impl FactSink for NullSink {
    fn consume(&mut self, _: &Fact) -> std::io::Result<()> {
        Ok(())
    }
}

/// Desk-scale parameters: small dimensions, fact count steered via `density`.
fn desk_params(seed: u64, density: f64, pm: f64, po: f64) -> GenParams {
    GenParams {
        density,
        p_missing: pm,
        p_reorder: po,
        seed,
        scale_divisor: 10_000,
        ..GenParams::default()
    }
}

fn desk_warehouse(seed: u64, density: f64, pm: f64, po: f64) -> Result<Warehouse, String> {
    let gp = desk_params(seed, density, pm, po);
    let (w, _) = generate_warehouse(&gp, CategoryTaxonomy::default_taxonomy())
        .map_err(|e| format!("generation failed (seed {seed}): {e}"))?;
    Ok(w)
}

/// Candidate-combination count of the desk-scale dimension grid.
fn desk_candidates() -> Result<f64, String> {
    let dims = generate_dimensions(&desk_params(0, 1e-6, 0.0, 0.0))
        .map_err(|e| format!("dimension generation failed: {e}"))?;
    Ok(dims.candidate_combinations() as f64)
}

fn spec_of(id: &str) -> xweb::workload::QuerySpec {
    query_spec(id.parse::<QueryId>().expect("valid query id"))
}

// --- criterion 1 -----------------------------------------------------------

#[test]
fn criterion_1_oracle_equivalence() {
    conclude(1, "oracle equivalence", check_oracle_equivalence());
}

fn check_oracle_equivalence() -> Result<String, String> {
    // 20 seeds cycling through the four (Pm, Po) combinations; every query
    // must agree with the brute-force oracle exactly, cents included.
    let density = 2_500.0 / desk_candidates()?;
    let combos = [(0.0, 0.0), (0.3, 0.0), (0.0, 0.5), (0.3, 0.5)];
    let mut max_facts = 0usize;
    for i in 0..20u64 {
        let (pm, po) = combos[(i % 4) as usize];
        let seed = 100 + i;
        let w = desk_warehouse(seed, density, pm, po)?;
        if w.facts.len() > 5_000 {
            return Err(format!("seed {seed} produced {} facts (> 5000)", w.facts.len()));
        }
        max_facts = max_facts.max(w.facts.len());
        for q in all_queries() {
            let got = evaluate(&w, &q).map_err(|e| format!("engine {}: {e}", q.id))?;
            let want = evaluate_oracle(&w, &q).map_err(|e| format!("oracle {}: {e}", q.id))?;
            if got != want {
                return Err(format!(
                    "seed {seed} (Pm {pm}, Po {po}) query {}: engine disagrees with oracle \
                     ({} vs {} rows)",
                    q.id,
                    got.rows.len(),
                    want.rows.len()
                ));
            }
        }
    }
    Ok(format!(
        "20 seeds x (Pm, Po) grid x 20 queries agree exactly; largest warehouse {max_facts} facts"
    ))
}

// --- criterion 2 -----------------------------------------------------------

#[test]
fn criterion_2_density_law() {
    conclude(2, "density law", check_density_law());
}

fn check_density_law() -> Result<String, String> {
    // Fixed cardinalities; emitted counts at D and 14·D over 10 seeds must
    // have ratio 14 within 4 sigma of the binomial ratio deviation
    // sqrt(210 / mu1), mu1 the expected total count at D.
    let gp0 = GenParams::default();
    let dims = generate_dimensions(&gp0).map_err(|e| e.to_string())?;
    let tax = CategoryTaxonomy::default_taxonomy();
    let assign =
        assign_categories(dims.parts.len(), &tax, &mut stage_rng(gp0.seed, GenStage::Assignment));
    let n = dims.candidate_combinations() as f64;
    let d1 = 420.0 / n;

    let count = |seed: u64, density: f64| -> Result<u64, String> {
        let gp = GenParams { density, seed, ..gp0.clone() };
        let stats =
            generate_facts(&dims, &assign, &gp, &mut stage_rng(seed, GenStage::Facts), &mut NullSink)
                .map_err(|e| e.to_string())?;
        Ok(stats.facts_emitted)
    };
    let mut n1 = 0u64;
    let mut n14 = 0u64;
    for seed in 0..10u64 {
        n1 += count(7_000 + seed, d1)?;
        n14 += count(7_100 + seed, 14.0 * d1)?;
    }

    let mu1 = 10.0 * n * d1;
    let tolerance = 4.0 * (210.0 / mu1).sqrt();
    let ratio = n14 as f64 / n1 as f64;
    if (ratio - 14.0).abs() > tolerance {
        return Err(format!(
            "count ratio {ratio:.4} ({n14} / {n1}) outside 14 ± {tolerance:.4}"
        ));
    }
    Ok(format!("count ratio {ratio:.4} ({n14} / {n1}) within 14 ± {tolerance:.4}"))
}

// --- criterion 3 -----------------------------------------------------------

#[test]
fn criterion_3_dirtiness_statistics() {
    conclude(3, "dirtiness statistics", check_dirtiness());
}

fn check_dirtiness() -> Result<String, String> {
    let gp0 = GenParams::default();
    let dims = generate_dimensions(&gp0).map_err(|e| e.to_string())?;
    let tax = CategoryTaxonomy::default_taxonomy();
    let assign =
        assign_categories(dims.parts.len(), &tax, &mut stage_rng(gp0.seed, GenStage::Assignment));
    let density = 15_000.0 / dims.candidate_combinations() as f64;

    let stats_for = |pm: f64, po: f64| -> Result<xweb::datagen::FactGenStats, String> {
        let gp = GenParams { density, p_missing: pm, p_reorder: po, ..gp0.clone() };
        let stats =
            generate_facts(&dims, &assign, &gp, &mut stage_rng(31, GenStage::Facts), &mut NullSink)
                .map_err(|e| e.to_string())?;
        if stats.facts_emitted < 10_000 {
            return Err(format!("sample too small: {} facts", stats.facts_emitted));
        }
        Ok(stats)
    };

    let missing = stats_for(0.25, 0.0)?;
    let nulled = missing.slots_nulled as f64 / (6.0 * missing.facts_emitted as f64);
    if (nulled - 0.25).abs() > 0.02 {
        return Err(format!("nulled-slot fraction {nulled:.4} outside 0.25 ± 0.02"));
    }

    let shuffled = stats_for(0.0, 0.5)?;
    let reordered = shuffled.facts_reordered as f64 / shuffled.facts_emitted as f64;
    // A uniform permutation of the six slots is the identity with p = 1/720.
    let expected = 0.5 * (719.0 / 720.0);
    if (reordered - expected).abs() > 0.02 {
        return Err(format!(
            "non-identity-order fraction {reordered:.4} outside {expected:.4} ± 0.02"
        ));
    }
    Ok(format!(
        "nulled fraction {nulled:.4} (0.25 ± 0.02), reordered fraction {reordered:.4} \
         ({expected:.4} ± 0.02) over {} facts",
        missing.facts_emitted.min(shuffled.facts_emitted)
    ))
}

// --- criterion 4 -----------------------------------------------------------

#[test]
fn criterion_4_taxonomy_invariants() {
    conclude(4, "taxonomy and assignment invariants", check_taxonomy_invariants());
}

fn check_taxonomy_invariants() -> Result<String, String> {
    let tax = CategoryTaxonomy::default_taxonomy();
    let catsets =
        assign_categories(10_000, &tax, &mut stage_rng(424_242, GenStage::Assignment)).catsets;
    if catsets.len() != 10_000 {
        return Err(format!("expected 10000 catsets, got {}", catsets.len()));
    }

    let mut non_strict = None;
    let mut non_covering = None;
    for (part, catset) in catsets.iter().enumerate() {
        if catset.is_empty() {
            return Err(format!("part {part} has an empty catset"));
        }
        let mut dedup = catset.clone();
        dedup.sort_unstable();
        dedup.dedup();
        if dedup.len() != catset.len() {
            return Err(format!("part {part} has duplicate categories: {catset:?}"));
        }

        if non_strict.is_none() {
            for c in catset {
                let level = level_of(c).ok_or_else(|| format!("unknown category {c}"))?;
                if catset.iter().any(|o| o != c && level_of(o) == Some(level)) {
                    non_strict = Some(part);
                    break;
                }
            }
        }
        if non_covering.is_none() {
            for c in catset {
                let level = level_of(c).ok_or_else(|| format!("unknown category {c}"))?;
                if level <= 1 {
                    continue;
                }
                let ancestors = tax
                    .supercategories(c)
                    .map_err(|e| format!("supercategories of {c}: {e}"))?;
                let has_parent_level = catset.iter().any(|o| {
                    level_of(o) == Some(level - 1) && ancestors.iter().any(|a| a == o)
                });
                if !has_parent_level {
                    non_covering = Some(part);
                    break;
                }
            }
        }
    }

    let non_strict = non_strict.ok_or("no part with two same-level categories found")?;
    let non_covering = non_covering
        .ok_or("no part holding a deep category without its next-level ancestor found")?;
    Ok(format!(
        "10000 catsets non-empty and duplicate-free; non-strictness witness part {non_strict}, \
         non-coveringness witness part {non_covering}"
    ))
}

// --- criterion 5 -----------------------------------------------------------

#[test]
fn criterion_5_codec_round_trip() {
    conclude(5, "codec round-trip", check_codec_round_trip());
}

fn round_trip(w: &Warehouse) -> Result<(), String> {
    let docs = emit_warehouse(&w.model, &w.dims, &w.catsets, &w.taxonomy, &w.facts)
        .map_err(|e| format!("emit: {e}"))?;
    let (back, warnings) = parse_warehouse(&docs).map_err(|e| format!("parse: {e}"))?;
    if !warnings.is_empty() {
        return Err(format!("parse produced warnings: {warnings:?}"));
    }
    if back.model != w.model {
        return Err("model changed across the round trip".into());
    }
    if back.dims != w.dims {
        return Err("dimension members changed across the round trip".into());
    }
    if back.catsets != w.catsets {
        return Err("category assignments changed across the round trip".into());
    }
    if back.taxonomy != w.taxonomy {
        return Err("taxonomy edges changed across the round trip".into());
    }
    if back.facts.len() != w.facts.len() {
        return Err(format!("fact count {} became {}", w.facts.len(), back.facts.len()));
    }
    for (i, (a, b)) in w.facts.iter().zip(&back.facts).enumerate() {
        if !a.logical_eq(b) {
            return Err(format!("fact {i} changed across the round trip"));
        }
    }
    Ok(())
}

fn check_codec_round_trip() -> Result<String, String> {
    let density = 250.0 / desk_candidates()?;
    let pms = [0.0, 0.2];
    let pos = [0.0, 0.5, 1.0];
    for i in 0..10u64 {
        let (pm, po) = (pms[(i % 2) as usize], pos[(i % 3) as usize]);
        let w = desk_warehouse(900 + i, density, pm, po)?;
        round_trip(&w).map_err(|e| format!("seed {} (Pm {pm}, Po {po}): {e}", 900 + i))?;
    }

    // Explicit shuffled-children fixture: every fact emitted back to front.
    let mut w = desk_warehouse(950, density, 0.0, 0.0)?;
    if w.facts.is_empty() {
        return Err("shuffle fixture generated no facts".into());
    }
    let mut reversed = Slot::ALL;
    reversed.reverse();
    for f in &mut w.facts {
        f.slot_order = reversed;
    }
    round_trip(&w).map_err(|e| format!("reversed-slot fixture: {e}"))?;
    Ok("10 random warehouses and a reversed-slot fixture survive parse(emit(w))".into())
}

// --- criterion 6 -----------------------------------------------------------

#[test]
fn criterion_6_protocol_accounting() {
    conclude(6, "protocol accounting", check_protocol_accounting());
}

fn stats_close(a: &Stats, b: &Stats) -> bool {
    // Pinned tolerance: recomputed and stored stats agree to the millisecond.
    let ms = Duration::from_millis(1);
    let close = |x: Duration, y: Duration| x.abs_diff(y) <= ms;
    close(a.global, b.global)
        && close(a.avg, b.avg)
        && close(a.min, b.min)
        && close(a.max, b.max)
        && close(a.stddev, b.stddev)
}

fn check_protocol_accounting() -> Result<String, String> {
    let density = 2_000.0 / desk_candidates()?;
    let w = desk_warehouse(7, density, 0.0, 0.0)?;
    let docs = emit_warehouse(&w.model, &w.dims, &w.catsets, &w.taxonomy, &w.facts)
        .map_err(|e| e.to_string())?;

    let mut drv = ReferenceDriver::new();
    let load = load_test(&mut drv, &docs).map_err(|e| e.to_string())?;
    if !load.complete || load.docs.len() != 6 {
        return Err(format!("load incomplete: {} documents", load.docs.len()));
    }

    let wc = WorkloadConfig { nrun: 3, ..WorkloadConfig::default() };
    let report = performance_test(&mut drv, &wc, &w.model, EnvInfo::capture())
        .map_err(|e| e.to_string())?;
    if report.queries.len() != 20 {
        return Err(format!("expected 20 queries, got {}", report.queries.len()));
    }
    let durations: usize = report.queries.iter().map(|q| q.executions.len()).sum();
    if durations != 80 {
        return Err(format!("expected 20 x 4 = 80 durations, got {durations}"));
    }
    if report.queries.iter().flat_map(|q| &q.executions).any(|e| !e.status.is_ok()) {
        return Err("a reference execution did not complete".into());
    }

    for q in &report.queries {
        let recomputed = compute_stats(&q.ok_durations())
            .ok_or_else(|| format!("{}: no durations to recompute", q.query))?;
        let stored = q.stats.ok_or_else(|| format!("{}: stats missing", q.query))?;
        if !stats_close(&recomputed, &stored) {
            return Err(format!(
                "{}: stored stats differ from recomputation by more than 1 ms",
                q.query
            ));
        }
    }
    let overall = report.overall.ok_or("overall stats missing")?;
    let all: Vec<Duration> = report
        .queries
        .iter()
        .flat_map(|q| q.ok_durations())
        .collect();
    let recomputed = compute_stats(&all).ok_or("no overall durations")?;
    if !stats_close(&recomputed, &overall) {
        return Err("overall stats differ from recomputation by more than 1 ms".into());
    }
    Ok(format!(
        "80 query durations + 1 load time ({:.3} ms); per-query and overall stats recompute \
         within 1 ms",
        load.total.as_secs_f64() * 1e3
    ))
}

// --- criterion 7 -----------------------------------------------------------

#[test]
fn criterion_7_drill_roll_conservation() {
    conclude(7, "drill/roll conservation", check_conservation());
}

fn column_total(r: &QueryResult, column: &str) -> Result<i64, String> {
    let idx = r
        .columns
        .iter()
        .position(|c| c == column)
        .ok_or_else(|| format!("column {column} missing from {:?}", r.columns))?;
    let mut total = 0i64;
    for row in &r.rows {
        match &row[idx] {
            Value::Int(n) => total += n,
            other => return Err(format!("column {column} holds {other:?}, expected an integer")),
        }
    }
    Ok(total)
}

fn check_conservation() -> Result<String, String> {
    let density = 2_000.0 / desk_candidates()?;
    let top_level = CategoryTaxonomy::default_taxonomy().members(1).len();
    if top_level != 5 {
        return Err(format!("expected 5 top-level categories, found {top_level}"));
    }
    let mut checked = Vec::new();
    for seed in [7u64, 8, 9] {
        let w = desk_warehouse(seed, density, 0.0, 0.0)?;
        let by_month = evaluate(&w, &spec_of("Q05")).map_err(|e| e.to_string())?;
        let by_day = evaluate(&w, &spec_of("Q06")).map_err(|e| e.to_string())?;
        let month_total = column_total(&by_month, "sum_f_quantity")?;
        let day_total = column_total(&by_day, "sum_f_quantity")?;
        if month_total != day_total {
            return Err(format!(
                "seed {seed}: quantity drilled by month ({month_total}) and by day \
                 ({day_total}) disagree"
            ));
        }
        let rolled = evaluate(&w, &spec_of("Q20")).map_err(|e| e.to_string())?;
        if rolled.rows.len() > top_level {
            return Err(format!(
                "seed {seed}: rolled-up groups {} exceed the {top_level} top-level categories",
                rolled.rows.len()
            ));
        }
        checked.push(month_total);
    }
    Ok(format!(
        "Q05 and Q06 grand totals equal on 3 seeds ({checked:?}); Q20 groups stay within the 5 \
         top-level categories"
    ))
}

// --- criterion 8 -----------------------------------------------------------

#[test]
fn criterion_8_http_adapter() {
    conclude(8, "HTTP adapter against the mock backend", check_http_adapter());
}

fn check_http_adapter() -> Result<String, String> {
    let latency = Duration::from_millis(15);
    let density = 500.0 / desk_candidates()?;
    let w = desk_warehouse(7, density, 0.0, 0.0)?;
    let docs = emit_warehouse(&w.model, &w.dims, &w.catsets, &w.taxonomy, &w.facts)
        .map_err(|e| e.to_string())?;

    let mock = MockBackend::start().map_err(|e| format!("mock backend: {e}"))?;
    mock.set_latency(latency);
    // Canned answers come from the engine; Q01's first aggregate is corrupted.
    for id in ["Q01", "Q02", "Q03"] {
        let mut rows = evaluate(&w, &spec_of(id)).map_err(|e| e.to_string())?;
        if id == "Q01" {
            match &mut rows.rows[0][0] {
                Value::Int(n) | Value::Dec(n) => *n += 1,
                Value::Str(s) => s.push('x'),
            }
        }
        mock.set_response(id, CannedResponse::Rows(rows));
    }

    let cfg = HttpDriverConfig {
        comparable_rows: true,
        ..HttpDriverConfig::for_base_url(mock.base_url())
    };
    let mut drv = HttpDriver::new(cfg);

    let load = load_test(&mut drv, &docs).map_err(|e| format!("load: {e}"))?;
    if !load.complete {
        return Err("load did not complete".into());
    }
    if let Some(doc) = load.docs.iter().find(|d| d.duration < latency) {
        return Err(format!(
            "load duration {:?} for {} is below the injected {latency:?} latency",
            doc.duration, doc.name
        ));
    }

    let wc = WorkloadConfig {
        cube_1d: false,
        cube_2d: false,
        cube_3d: false,
        complex_hierarchy: false,
        nrun: 1,
        ..WorkloadConfig::default()
    };
    let report = performance_test(&mut drv, &wc, &w.model, EnvInfo::capture())
        .map_err(|e| e.to_string())?;
    let executions: Vec<_> = report.queries.iter().flat_map(|q| &q.executions).collect();
    if executions.len() != 6 {
        return Err(format!("expected 3 queries x 2 runs, got {}", executions.len()));
    }
    if executions.iter().any(|e| !e.status.is_ok()) {
        return Err("an execution against the mock failed".into());
    }
    if let Some(e) = executions.iter().find(|e| e.duration < latency) {
        return Err(format!(
            "recorded duration {:?} is below the injected {latency:?} latency",
            e.duration
        ));
    }

    let verdicts = verify_backend(&mut drv, &w, &wc).map_err(|e| e.to_string())?;
    let verdict_of = |id: &str| {
        verdicts
            .iter()
            .find(|v| v.query == id)
            .map(|v| v.verdict.clone())
            .ok_or_else(|| format!("no verdict for {id}"))
    };
    if !matches!(verdict_of("Q01")?, Verdict::Mismatch(_)) {
        return Err(format!("corrupted Q01 was not flagged: {:?}", verdict_of("Q01")?));
    }
    for id in ["Q02", "Q03"] {
        if verdict_of(id)? != Verdict::Match {
            return Err(format!("faithful {id} did not match: {:?}", verdict_of(id)?));
        }
    }
    Ok(format!(
        "load + RE block completed with every duration >= {latency:?}; the fault-injected \
         answer was flagged as a mismatch"
    ))
}

// --- criterion 9 -----------------------------------------------------------

#[test]
fn criterion_9_size_estimate() {
    conclude(9, "size-estimate formula", check_size_estimate());
}

fn check_size_estimate() -> Result<String, String> {
    let inputs: Vec<DimSizeInput> = [150u64, 200, 10, 2557]
        .into_iter()
        .map(|n| DimSizeInput { cardinality: n, finest_cardinality: n, nodesize: 220 })
        .collect();
    let gp = |density: f64| GenParams { density, ..GenParams::default() };

    // Hand product at full density: 220 B * 150 * 200 * 10 * 2557.
    let mut hand: u128 = 220;
    for n in [150u128, 200, 10, 2557] {
        hand *= n;
    }
    let est = estimate_size(&gp(1.0), &inputs, 220).map_err(|e| e.to_string())?;
    if est.s_facts != hand as f64 {
        return Err(format!("fact size {} differs from the hand product {hand}", est.s_facts));
    }
    let dim_hand = (150 + 200 + 10 + 2557) * 220;
    if est.s_dimensions != dim_hand {
        return Err(format!(
            "dimension size {} differs from the hand sum {dim_hand}",
            est.s_dimensions
        ));
    }

    for d in [1e-7, 3.5e-4, 0.25] {
        let lo = estimate_size(&gp(d), &inputs, 220).map_err(|e| e.to_string())?;
        let hi = estimate_size(&gp(2.0 * d), &inputs, 220).map_err(|e| e.to_string())?;
        if hi.s_facts != 2.0 * lo.s_facts {
            return Err(format!(
                "doubling density {d} scaled the estimate by {} instead of 2",
                hi.s_facts / lo.s_facts
            ));
        }
    }
    Ok(format!("hand product {hand} B reproduced exactly; estimate exactly linear in density"))
}
