//! Part-category assignment for the complex hierarchy.
//!
//! Each part receives one to three "root" categories drawn from random
//! levels, and each root may pull in candidate subcategories from the levels
//! below it. Because a root may start below level 1 with no subcategories —
//! and because subcategory candidates are unrelated to the root's actual
//! taxonomy edges — the resulting attachment is non-covering; drawing several
//! same-level categories makes it non-strict.

use rand::Rng;

use crate::taxonomy::{CategoryTaxonomy, LEVELS};

/// Per-part category sets, indexed like the part table, in draw order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CategoryAssignment {
    pub catsets: Vec<Vec<&'static str>>,
}

impl CategoryAssignment {
    pub fn part_count(&self) -> usize {
        self.catsets.len()
    }

    pub fn catset(&self, part_index: usize) -> &[&'static str] {
        &self.catsets[part_index]
    }
}

/// How many unsuccessful same-level draws are tolerated before the root's
/// level itself is redrawn (guards against a fully held level).
const ROOT_RETRY_CAP: usize = 100;

/// Assigns categories to `part_count` parts.
///
/// Per part: `ncat = RANDOM(1,3)` roots; each root draws a level
/// `lvl = RANDOM(1,3)` and then a member of that level, repeating until the
/// member is new to the part's catset (capped by `ROOT_RETRY_CAP`, after
/// which the level is redrawn); then `nsubcat = RANDOM(0, 3-lvl)` candidates
/// are drawn one from each successive deeper level and added only if absent.
pub fn assign_categories<R: Rng + ?Sized>(
    part_count: usize,
    tax: &CategoryTaxonomy,
    rng: &mut R,
) -> CategoryAssignment {
    let mut catsets = Vec::with_capacity(part_count);
    for _ in 0..part_count {
        let mut catset: Vec<&'static str> = Vec::new();
        let ncat = rng.random_range(1..=3u8);
        for _ in 0..ncat {
            let (lvl, root) = loop {
                let lvl = rng.random_range(1..=LEVELS);
                let members = tax.members(lvl);
                let mut picked = None;
                for _ in 0..ROOT_RETRY_CAP {
                    let cand = members[rng.random_range(0..members.len())];
                    if !catset.contains(&cand) {
                        picked = Some(cand);
                        break;
                    }
                }
                if let Some(cand) = picked {
                    break (lvl, cand);
                }
            };
            catset.push(root);
            let nsubcat = rng.random_range(0..=(LEVELS - lvl));
            for step in 1..=nsubcat {
                let members = tax.members(lvl + step);
                let cand = members[rng.random_range(0..members.len())];
                if !catset.contains(&cand) {
                    catset.push(cand);
                }
            }
        }
        catsets.push(catset);
    }
    CategoryAssignment { catsets }
}
