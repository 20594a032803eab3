//! The part/category taxonomy: a fixed three-level category vocabulary wired
//! by a configurable many-to-many edge set.
//!
//! Level 1 is the coarsest (materials), level 2 finishes, level 3 containers.
//! Every category except level-1 members has at least one parent on the level
//! immediately above, and at least one category anywhere must have two or
//! more parents, which is what makes the hierarchy non-strict. Parts attach
//! to categories of any level, so the hierarchy is also non-covering, but
//! that property lives in the generated data, not here.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

pub const LEVEL1: [&str; 5] = ["BRASS", "COPPER", "NICKEL", "STEEL", "TIN"];
pub const LEVEL2: [&str; 5] = ["ANODIZED", "BRUSHED", "BURNISHED", "PLATED", "POLISHED"];
pub const LEVEL3: [&str; 6] = ["ECONOMY", "LARGE", "MEDIUM", "PROMO", "SMALL", "STANDARD"];

/// Number of hierarchy levels; level numbers run 1 (coarsest) to 3 (finest).
pub const LEVELS: u8 = 3;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TaxonomyError {
    #[error("line {line}: expected `CHILD -> PARENT`, got {text:?}")]
    Syntax { line: usize, text: String },
    #[error("unknown category {name:?}")]
    UnknownCategory { name: String },
    #[error("{child:?} (level {child_level}) cannot attach to {parent:?} (level {parent_level}): a parent must sit one level up")]
    NonAdjacentEdge { child: String, child_level: u8, parent: String, parent_level: u8 },
    #[error("duplicate edge {child:?} -> {parent:?}")]
    DuplicateEdge { child: String, parent: String },
    #[error("category {name:?} has no parent")]
    MissingParent { name: String },
    #[error("taxonomy is strict: every category has at most one parent")]
    NoNonStrictWitness,
}

/// The category hierarchy: fixed vocabulary plus a validated edge set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CategoryTaxonomy {
    /// child name -> sorted parent names (level-1 members are absent).
    parents: BTreeMap<String, Vec<String>>,
}

/// Level (1-3) of a category name from the fixed vocabulary.
pub fn level_of(name: &str) -> Option<u8> {
    if LEVEL1.contains(&name) {
        Some(1)
    } else if LEVEL2.contains(&name) {
        Some(2)
    } else if LEVEL3.contains(&name) {
        Some(3)
    } else {
        None
    }
}

/// Members of one level, in name order.
pub fn level_members(level: u8) -> &'static [&'static str] {
    match level {
        1 => &LEVEL1,
        2 => &LEVEL2,
        3 => &LEVEL3,
        _ => &[],
    }
}

/// All category names, coarsest level first, name order within a level.
pub fn all_names() -> impl Iterator<Item = &'static str> {
    LEVEL1.into_iter().chain(LEVEL2).chain(LEVEL3)
}

impl CategoryTaxonomy {
    /// The built-in edge set.
    pub fn default_taxonomy() -> Self {
        let edges = [
            ("ANODIZED", "BRASS"),
            ("BRUSHED", "NICKEL"),
            ("BRUSHED", "STEEL"),
            ("BURNISHED", "COPPER"),
            ("BURNISHED", "TIN"),
            ("PLATED", "COPPER"),
            ("POLISHED", "STEEL"),
            ("POLISHED", "TIN"),
            ("ECONOMY", "BRUSHED"),
            ("LARGE", "POLISHED"),
            ("MEDIUM", "ANODIZED"),
            ("MEDIUM", "BURNISHED"),
            ("PROMO", "PLATED"),
            ("PROMO", "POLISHED"),
            ("SMALL", "ANODIZED"),
            ("SMALL", "BRUSHED"),
            ("STANDARD", "BRUSHED"),
            ("STANDARD", "PLATED"),
        ];
        Self::from_edges(edges.iter().map(|&(c, p)| (c.to_string(), p.to_string())))
            .expect("built-in taxonomy is valid")
    }

    /// Builds a taxonomy from `(child, parent)` pairs and validates it.
    pub fn from_edges(edges: impl IntoIterator<Item = (String, String)>) -> Result<Self, TaxonomyError> {
        let mut parents: BTreeMap<String, Vec<String>> = BTreeMap::new();
        for (child, parent) in edges {
            let cl = level_of(&child).ok_or(TaxonomyError::UnknownCategory { name: child.clone() })?;
            let pl = level_of(&parent).ok_or(TaxonomyError::UnknownCategory { name: parent.clone() })?;
            if cl != pl + 1 {
                return Err(TaxonomyError::NonAdjacentEdge {
                    child,
                    child_level: cl,
                    parent,
                    parent_level: pl,
                });
            }
            let slot = parents.entry(child.clone()).or_default();
            if slot.contains(&parent) {
                return Err(TaxonomyError::DuplicateEdge { child, parent });
            }
            slot.push(parent);
        }
        for v in parents.values_mut() {
            v.sort();
        }
        let tax = CategoryTaxonomy { parents };
        tax.validate()?;
        Ok(tax)
    }

    /// Parses the override file format: one `CHILD -> PARENT` edge per line,
    /// with blank lines and `#` comments ignored.
    pub fn parse(text: &str) -> Result<Self, TaxonomyError> {
        let mut edges = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (child, parent) = line
                .split_once("->")
                .ok_or_else(|| TaxonomyError::Syntax { line: idx + 1, text: raw.to_string() })?;
            let (child, parent) = (child.trim(), parent.trim());
            if child.is_empty() || parent.is_empty() {
                return Err(TaxonomyError::Syntax { line: idx + 1, text: raw.to_string() });
            }
            edges.push((child.to_string(), parent.to_string()));
        }
        Self::from_edges(edges)
    }

    /// Checks the structural invariants: full parent coverage above level 1
    /// and at least one multi-parent category.
    pub fn validate(&self) -> Result<(), TaxonomyError> {
        for name in LEVEL2.into_iter().chain(LEVEL3) {
            if self.parents(name).is_empty() {
                return Err(TaxonomyError::MissingParent { name: name.to_string() });
            }
        }
        if !self.parents.values().any(|p| p.len() >= 2) {
            return Err(TaxonomyError::NoNonStrictWitness);
        }
        Ok(())
    }

    /// Members of one level of the (fixed) vocabulary.
    pub fn members(&self, level: u8) -> &'static [&'static str] {
        level_members(level)
    }

    /// Parents of a category, sorted by name; empty for level-1 members.
    pub fn parents(&self, name: &str) -> &[String] {
        self.parents.get(name).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Children of a category, sorted by name.
    pub fn children(&self, name: &str) -> Vec<&str> {
        self.parents
            .iter()
            .filter(|(_, ps)| ps.iter().any(|p| p == name))
            .map(|(c, _)| c.as_str())
            .collect()
    }

    /// Level-1 ancestors of a category; a level-1 category maps to itself.
    pub fn supercategories(&self, name: &str) -> Result<Vec<String>, TaxonomyError> {
        let level = level_of(name).ok_or(TaxonomyError::UnknownCategory { name: name.to_string() })?;
        let mut frontier = vec![name.to_string()];
        for _ in 1..level {
            let mut next: Vec<String> = frontier
                .iter()
                .flat_map(|n| self.parents(n).iter().cloned())
                .collect();
            next.sort();
            next.dedup();
            frontier = next;
        }
        Ok(frontier)
    }

    /// All `(child, parent)` edges, sorted by level, then child, then parent.
    pub fn edges(&self) -> Vec<(String, String)> {
        let mut v: Vec<(String, String)> = self
            .parents
            .iter()
            .flat_map(|(c, ps)| ps.iter().map(move |p| (c.clone(), p.clone())))
            .collect();
        v.sort_by(|a, b| {
            (level_of(&a.0), &a.0, &a.1).cmp(&(level_of(&b.0), &b.0, &b.1))
        });
        v
    }

    /// Renders the taxonomy in the override file format (canonical order).
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (c, p) in self.edges() {
            writeln!(out, "{c} -> {p}").unwrap();
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_taxonomy_is_valid() {
        let t = CategoryTaxonomy::default_taxonomy();
        t.validate().unwrap();
        assert_eq!(t.parents("BRUSHED"), ["NICKEL", "STEEL"]);
        assert_eq!(t.children("BRUSHED"), ["ECONOMY", "SMALL", "STANDARD"]);
        assert_eq!(t.parents("BRASS"), Vec::<String>::new().as_slice());
        // Every level-2 and level-3 member is attached.
        for n in LEVEL2.into_iter().chain(LEVEL3) {
            assert!(!t.parents(n).is_empty(), "{n} unattached");
        }
    }

    #[test]
    fn vocabulary_levels() {
        assert_eq!(level_of("STEEL"), Some(1));
        assert_eq!(level_of("BRUSHED"), Some(2));
        assert_eq!(level_of("PROMO"), Some(3));
        assert_eq!(level_of("CHROME"), None);
        assert_eq!(all_names().count(), 16);
        assert_eq!(level_members(2), LEVEL2);
        assert!(level_members(4).is_empty());
    }

    #[test]
    fn supercategories_walk_to_level_one() {
        let t = CategoryTaxonomy::default_taxonomy();
        assert_eq!(t.supercategories("BRASS").unwrap(), ["BRASS"]);
        assert_eq!(t.supercategories("BRUSHED").unwrap(), ["NICKEL", "STEEL"]);
        // STANDARD -> {BRUSHED, PLATED} -> {NICKEL, STEEL} u {COPPER}.
        assert_eq!(t.supercategories("STANDARD").unwrap(), ["COPPER", "NICKEL", "STEEL"]);
        assert!(t.supercategories("CHROME").is_err());
    }

    #[test]
    fn text_round_trip() {
        let t = CategoryTaxonomy::default_taxonomy();
        let text = t.to_text();
        assert!(text.contains("BRUSHED -> NICKEL\n"));
        let back = CategoryTaxonomy::parse(&text).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn parse_accepts_comments_and_blank_lines() {
        let t = CategoryTaxonomy::default_taxonomy();
        let text = format!("# rewiring\n\n  {}", t.to_text().replace('\n', " # tail\n"));
        assert_eq!(CategoryTaxonomy::parse(&text).unwrap(), t);
    }

    #[test]
    fn parse_rejects_bad_input() {
        assert_eq!(
            CategoryTaxonomy::parse("BRUSHED NICKEL"),
            Err(TaxonomyError::Syntax { line: 1, text: "BRUSHED NICKEL".into() })
        );
        assert_eq!(
            CategoryTaxonomy::parse("CHROME -> STEEL"),
            Err(TaxonomyError::UnknownCategory { name: "CHROME".into() })
        );
        assert_eq!(
            CategoryTaxonomy::parse("ECONOMY -> BRASS"),
            Err(TaxonomyError::NonAdjacentEdge {
                child: "ECONOMY".into(),
                child_level: 3,
                parent: "BRASS".into(),
                parent_level: 1,
            })
        );
        let mut text = CategoryTaxonomy::default_taxonomy().to_text();
        text.push_str("BRUSHED -> NICKEL\n");
        assert_eq!(
            CategoryTaxonomy::parse(&text),
            Err(TaxonomyError::DuplicateEdge { child: "BRUSHED".into(), parent: "NICKEL".into() })
        );
    }

    #[test]
    fn validation_names_uncovered_categories_and_strict_sets() {
        // Drop every PROMO edge: PROMO ends up parentless.
        let edges: Vec<_> = CategoryTaxonomy::default_taxonomy()
            .edges()
            .into_iter()
            .filter(|(c, _)| c != "PROMO")
            .collect();
        assert_eq!(
            CategoryTaxonomy::from_edges(edges),
            Err(TaxonomyError::MissingParent { name: "PROMO".into() })
        );

        // Keep exactly one parent per child: structurally complete but strict.
        let mut seen = std::collections::BTreeSet::new();
        let edges: Vec<_> = CategoryTaxonomy::default_taxonomy()
            .edges()
            .into_iter()
            .filter(|(c, _)| seen.insert(c.clone()))
            .collect();
        assert_eq!(CategoryTaxonomy::from_edges(edges), Err(TaxonomyError::NoNonStrictWitness));
    }
}
