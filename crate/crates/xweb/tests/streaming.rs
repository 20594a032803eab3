//! Streaming guarantee: a million-fact document can be generated and emitted
//! with bounded heap, and output size grows linearly with the fact count.
//!
//! A counting global allocator measures the peak heap growth during the
//! streaming window, so this file holds a single test.

use std::alloc::{GlobalAlloc, Layout, System};
use std::io::{self, Write};
use std::sync::atomic::{AtomicUsize, Ordering};

use xweb::codec::XmlFactWriter;
use xweb::datagen::{
    assign_categories, generate_dimensions, generate_facts, stage_rng, FactGenStats, GenParams,
    GenStage,
};
use xweb::taxonomy::CategoryTaxonomy;

static CURRENT: AtomicUsize = AtomicUsize::new(0);
static PEAK: AtomicUsize = AtomicUsize::new(0);

struct CountingAllocator;

unsafe impl GlobalAlloc for CountingAllocator {
    unsafe fn alloc(&self, layout: Layout) -> *mut u8 {
        let p = System.alloc(layout);
        if !p.is_null() {
            let now = CURRENT.fetch_add(layout.size(), Ordering::SeqCst) + layout.size();
            PEAK.fetch_max(now, Ordering::SeqCst);
        }
        p
    }

    unsafe fn dealloc(&self, ptr: *mut u8, layout: Layout) {
        System.dealloc(ptr, layout);
        CURRENT.fetch_sub(layout.size(), Ordering::SeqCst);
    }
}

#[global_allocator]
static ALLOCATOR: CountingAllocator = CountingAllocator;

/// Discards everything, keeping only the byte count.
struct ByteCounter(u64);

impl Write for ByteCounter {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        self.0 += buf.len() as u64;
        Ok(buf.len())
    }

    fn flush(&mut self) -> io::Result<()> {
        Ok(())
    }
}

/// Streams one generated fact document into a discarding writer and returns
/// (facts emitted, bytes written, peak heap growth during the stream).
fn stream_document(
    gp: &GenParams,
    dims: &xweb::datagen::DimensionSet,
    assign: &xweb::datagen::CategoryAssignment,
) -> (FactGenStats, u64, usize) {
    let mut writer = XmlFactWriter::new(ByteCounter(0), "f_sale").expect("counter write");
    let baseline = CURRENT.load(Ordering::SeqCst);
    PEAK.store(baseline, Ordering::SeqCst);
    let stats = generate_facts(dims, assign, gp, &mut stage_rng(gp.seed, GenStage::Facts), &mut writer)
        .expect("generation succeeds");
    let peak_growth = PEAK.load(Ordering::SeqCst).saturating_sub(baseline);
    let counter = writer.finish().expect("counter write");
    (stats, counter.0, peak_growth)
}

#[test]
fn million_fact_stream_is_flat_in_memory_and_linear_in_size() {
    let gp = GenParams::default();
    let dims = generate_dimensions(&gp).expect("dimensions");
    let tax = CategoryTaxonomy::default_taxonomy();
    let assign =
        assign_categories(dims.parts.len(), &tax, &mut stage_rng(gp.seed, GenStage::Assignment));
    let candidates = dims.candidate_combinations() as f64;

    let big = GenParams { density: 1_050_000.0 / candidates, ..gp.clone() };
    let (stats, bytes, peak_growth) = stream_document(&big, &dims, &assign);
    assert!(
        stats.facts_emitted >= 1_000_000,
        "expected a million-fact stream, got {}",
        stats.facts_emitted
    );

    // The document is two orders of magnitude larger than the allowed heap
    // growth: emission must not buffer it.
    let cap = 8 * 1024 * 1024;
    assert!(
        bytes > 20 * cap as u64,
        "document too small ({bytes} B) for the bound to mean anything"
    );
    assert!(
        peak_growth < cap,
        "peak heap grew by {peak_growth} B while streaming a {bytes} B document"
    );

    // Output bytes track the fact count linearly (same per-fact size law).
    let small = GenParams { density: 100_000.0 / candidates, ..gp.clone() };
    let (small_stats, small_bytes, _) = stream_document(&small, &dims, &assign);
    assert!(small_stats.facts_emitted > 90_000);
    let per_fact_big = bytes as f64 / stats.facts_emitted as f64;
    let per_fact_small = small_bytes as f64 / small_stats.facts_emitted as f64;
    let drift = (per_fact_big - per_fact_small).abs() / per_fact_small;
    assert!(
        drift < 0.01,
        "bytes per fact drifted {:.3}% between {} and {} facts",
        drift * 100.0,
        small_stats.facts_emitted,
        stats.facts_emitted
    );
}
