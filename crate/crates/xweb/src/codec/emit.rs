//! Deterministic XML emission.
//!
//! Layout conventions, fixed so output is reproducible byte for byte:
//! UTF-8 with an XML declaration, `\n` line endings, two-space indent per
//! nesting depth, member attributes in declaration order, and a single
//! parent rendered as a `parent` attribute while multiple parents become
//! repeated `<parent ref="..."/>` children.

use std::borrow::Cow;
use std::io::{self, Write};

use crate::datagen::{Calendar, Customer, DimensionSet, Nation, Part, Region, Supplier};
use crate::fact::Fact;
use crate::model::{validate_model, DimensionDef, WarehouseModel};
use crate::taxonomy::CategoryTaxonomy;
use crate::value::fmt_cents;

use super::{CodecError, InstanceData, LevelData, NamedDoc, WarehouseDocuments, MODEL_DOC_NAME};

const XML_DECL: &str = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";

fn esc(s: &str) -> Cow<'_, str> {
    if !s.contains(['&', '<', '>', '"']) {
        return Cow::Borrowed(s);
    }
    let mut out = String::with_capacity(s.len() + 8);
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            _ => out.push(c),
        }
    }
    Cow::Owned(out)
}

/// Renders the warehouse model document.
pub fn emit_model(m: &WarehouseModel) -> Result<Vec<u8>, CodecError> {
    let problems = validate_model(m);
    if !problems.is_empty() {
        return Err(CodecError::InvalidModel(problems));
    }
    let mut s = String::from(XML_DECL);
    s.push_str("<xweb-dw-model>\n");
    s.push_str(&format!(
        "  <fact id=\"{}\" path=\"{}\">\n",
        esc(&m.fact.id),
        esc(&m.fact.path)
    ));
    for measure in &m.fact.measures {
        s.push_str(&format!("    <measure name=\"{}\"/>\n", esc(measure)));
    }
    for dr in &m.fact.dimrefs {
        s.push_str(&format!(
            "    <dimref dimension=\"{}\" attribute=\"{}\"/>\n",
            esc(&dr.dimension),
            esc(&dr.attribute)
        ));
    }
    s.push_str("  </fact>\n");
    for d in &m.dimensions {
        s.push_str(&format!(
            "  <dimension id=\"{}\" path=\"{}\">\n",
            esc(&d.id),
            esc(&d.path)
        ));
        for level in &d.levels {
            s.push_str(&format!(
                "    <level id=\"{}\" rollup=\"{}\" drilldown=\"{}\"/>\n",
                esc(&level.id),
                esc(&level.rollup.join(" ")),
                esc(&level.drilldown.join(" "))
            ));
        }
        s.push_str("  </dimension>\n");
    }
    s.push_str("</xweb-dw-model>\n");
    Ok(s.into_bytes())
}

/// Renders one dimension document from per-level instance data.
///
/// Enforces the structural preconditions: `data` mirrors `d.levels` one to
/// one, every instance on a level with a rollup target carries at least one
/// parent, and every parent reference names an instance on one of the target
/// levels.
pub fn emit_dimension(d: &DimensionDef, data: &[LevelData]) -> Result<Vec<u8>, CodecError> {
    if data.len() != d.levels.len() {
        return Err(CodecError::Inconsistent(format!(
            "dimension {:?} declares {} levels but {} were supplied",
            d.id,
            d.levels.len(),
            data.len()
        )));
    }
    for (ld, def) in data.iter().zip(&d.levels) {
        if ld.level != def.id {
            return Err(CodecError::Inconsistent(format!(
                "dimension {:?}: level data {:?} does not match declared level {:?}",
                d.id, ld.level, def.id
            )));
        }
    }
    for (ld, def) in data.iter().zip(&d.levels) {
        let mut valid_parents: std::collections::HashSet<&str> = std::collections::HashSet::new();
        for target in &def.rollup {
            if let Some(t) = data.iter().find(|x| &x.level == target) {
                valid_parents.extend(t.instances.iter().map(|i| i.id.as_str()));
            }
        }
        // A level that rolls up only to itself hosts a whole hierarchy, so
        // its root instances are legitimately parentless.
        let self_recursive = def.rollup.iter().all(|t| *t == def.id);
        for inst in &ld.instances {
            if !def.rollup.is_empty() && !self_recursive && inst.parents.is_empty() {
                return Err(CodecError::MissingParentRef {
                    dimension: d.id.clone(),
                    level: ld.level.clone(),
                    instance: inst.id.clone(),
                });
            }
            for p in &inst.parents {
                if !valid_parents.contains(p.as_str()) {
                    return Err(CodecError::Orphan {
                        dimension: d.id.clone(),
                        level: ld.level.clone(),
                        instance: inst.id.clone(),
                        parent: p.clone(),
                    });
                }
            }
        }
    }

    let mut s = String::from(XML_DECL);
    s.push_str(&format!("<dimension id=\"{}\">\n", esc(&d.id)));
    for ld in data {
        s.push_str(&format!("  <Level id=\"{}\">\n", esc(&ld.level)));
        for inst in &ld.instances {
            let single_parent = if inst.parents.len() == 1 {
                format!(" parent=\"{}\"", esc(&inst.parents[0]))
            } else {
                String::new()
            };
            if inst.attrs.is_empty() && inst.parents.len() <= 1 {
                s.push_str(&format!(
                    "    <instance id=\"{}\"{}/>\n",
                    esc(&inst.id),
                    single_parent
                ));
                continue;
            }
            s.push_str(&format!(
                "    <instance id=\"{}\"{}>\n",
                esc(&inst.id),
                single_parent
            ));
            for (name, value) in &inst.attrs {
                s.push_str(&format!(
                    "      <{name}>{}</{name}>\n",
                    esc(value),
                    name = esc(name)
                ));
            }
            if inst.parents.len() > 1 {
                for p in &inst.parents {
                    s.push_str(&format!("      <parent ref=\"{}\"/>\n", esc(p)));
                }
            }
            s.push_str("    </instance>\n");
        }
        s.push_str("  </Level>\n");
    }
    s.push_str("</dimension>\n");
    Ok(s.into_bytes())
}

/// Streaming fact-document writer; implements [`crate::datagen::FactSink`]
/// so a generation run can emit straight to disk in constant memory.
///
/// Call [`XmlFactWriter::finish`] to close the root element; dropping the
/// writer without it leaves the document unterminated.
pub struct XmlFactWriter<W: Write> {
    out: W,
    count: u64,
}

impl<W: Write> XmlFactWriter<W> {
    pub fn new(mut out: W, fact_id: &str) -> io::Result<Self> {
        out.write_all(XML_DECL.as_bytes())?;
        out.write_all(format!("<facts id=\"{}\">\n", esc(fact_id)).as_bytes())?;
        Ok(XmlFactWriter { out, count: 0 })
    }

    pub fn write_fact(&mut self, f: &Fact) -> io::Result<()> {
        let mut line = String::with_capacity(160);
        line.push_str("  <fact>\n");
        for slot in f.slot_order {
            let Some(v) = f.value(slot) else { continue };
            let name = slot.element_name();
            line.push_str(&format!("    <{name}>{v}</{name}>\n"));
        }
        line.push_str("  </fact>\n");
        self.out.write_all(line.as_bytes())?;
        self.count += 1;
        Ok(())
    }

    /// Facts written so far.
    pub fn count(&self) -> u64 {
        self.count
    }

    /// Closes the root element and returns the underlying writer, flushed.
    pub fn finish(mut self) -> io::Result<W> {
        self.out.write_all(b"</facts>\n")?;
        self.out.flush()?;
        Ok(self.out)
    }
}

impl<W: Write> crate::datagen::FactSink for XmlFactWriter<W> {
    fn consume(&mut self, fact: &Fact) -> io::Result<()> {
        self.write_fact(fact)
    }
}

/// Renders a complete fact document in memory.
pub fn emit_facts(facts: &[Fact], fact_id: &str) -> Vec<u8> {
    let mut w = XmlFactWriter::new(Vec::new(), fact_id).expect("vec write");
    for f in facts {
        w.write_fact(f).expect("vec write");
    }
    w.finish().expect("vec write")
}

fn money(cents: i64) -> String {
    fmt_cents(cents)
}

/// Level data for the date dimension: Day, Month, Year.
pub fn date_level_data(cal: &Calendar) -> Vec<LevelData> {
    let days = cal
        .days
        .iter()
        .map(|d| InstanceData {
            id: d.key.to_string(),
            parents: vec![cal.months[d.month].key.to_string()],
            attrs: vec![
                ("d_datekey".into(), d.key.to_string()),
                ("d_dayname".into(), d.dayname.clone()),
            ],
        })
        .collect();
    let months = cal
        .months
        .iter()
        .map(|m| InstanceData {
            id: m.key.to_string(),
            parents: vec![cal.years[m.year].key.to_string()],
            attrs: vec![
                ("m_monthkey".into(), m.monthkey.to_string()),
                ("m_monthname".into(), m.monthname.clone()),
            ],
        })
        .collect();
    let years = cal
        .years
        .iter()
        .map(|y| InstanceData {
            id: y.key.to_string(),
            parents: Vec::new(),
            attrs: vec![("y_yearkey".into(), y.key.to_string())],
        })
        .collect();
    vec![
        LevelData { level: "Day".into(), instances: days },
        LevelData { level: "Month".into(), instances: months },
        LevelData { level: "Year".into(), instances: years },
    ]
}

/// Level data for the part dimension: Part (with category parents), Category.
pub fn part_level_data(
    parts: &[Part],
    catsets: &[Vec<String>],
    tax: &CategoryTaxonomy,
) -> Result<Vec<LevelData>, CodecError> {
    if parts.len() != catsets.len() {
        return Err(CodecError::Inconsistent(format!(
            "{} parts but {} category sets",
            parts.len(),
            catsets.len()
        )));
    }
    let part_instances = parts
        .iter()
        .zip(catsets)
        .map(|(p, cats)| InstanceData {
            id: p.key.to_string(),
            parents: cats.clone(),
            attrs: vec![
                ("p_partkey".into(), p.key.to_string()),
                ("p_name".into(), p.name.clone()),
                ("p_brand".into(), p.brand.clone()),
                ("p_retailprice".into(), money(p.retailprice_cents)),
                ("p_size".into(), p.size.to_string()),
            ],
        })
        .collect();
    let categories = crate::taxonomy::all_names()
        .into_iter()
        .map(|name| InstanceData {
            id: name.to_string(),
            parents: tax.parents(name).to_vec(),
            attrs: vec![("t_name".into(), name.to_string())],
        })
        .collect();
    Ok(vec![
        LevelData { level: "Part".into(), instances: part_instances },
        LevelData { level: "Category".into(), instances: categories },
    ])
}

fn nation_instances(nations: &[Nation], regions: &[Region]) -> Vec<InstanceData> {
    nations
        .iter()
        .map(|n| InstanceData {
            id: n.key.to_string(),
            parents: vec![regions[n.region].key.to_string()],
            attrs: vec![("n_name".into(), n.name.clone())],
        })
        .collect()
}

fn region_instances(regions: &[Region]) -> Vec<InstanceData> {
    regions
        .iter()
        .map(|r| InstanceData {
            id: r.key.to_string(),
            parents: Vec::new(),
            attrs: vec![("r_name".into(), r.name.clone())],
        })
        .collect()
}

/// Level data for the customer dimension: Customer, C_Nation, C_Region.
pub fn customer_level_data(
    customers: &[Customer],
    nations: &[Nation],
    regions: &[Region],
) -> Vec<LevelData> {
    let custs = customers
        .iter()
        .map(|c| InstanceData {
            id: c.key.to_string(),
            parents: vec![nations[c.nation].key.to_string()],
            attrs: vec![
                ("c_custkey".into(), c.key.to_string()),
                ("c_name".into(), c.name.clone()),
                ("c_acctbal".into(), money(c.acctbal_cents)),
                ("c_mktsegment".into(), c.mktsegment.clone()),
            ],
        })
        .collect();
    vec![
        LevelData { level: "Customer".into(), instances: custs },
        LevelData { level: "C_Nation".into(), instances: nation_instances(nations, regions) },
        LevelData { level: "C_Region".into(), instances: region_instances(regions) },
    ]
}

/// Level data for the supplier dimension: Supplier, S_Nation, S_Region.
pub fn supplier_level_data(
    suppliers: &[Supplier],
    nations: &[Nation],
    regions: &[Region],
) -> Vec<LevelData> {
    let supps = suppliers
        .iter()
        .map(|s| InstanceData {
            id: s.key.to_string(),
            parents: vec![nations[s.nation].key.to_string()],
            attrs: vec![
                ("s_suppkey".into(), s.key.to_string()),
                ("s_name".into(), s.name.clone()),
                ("s_acctbal".into(), money(s.acctbal_cents)),
            ],
        })
        .collect();
    vec![
        LevelData { level: "Supplier".into(), instances: supps },
        LevelData { level: "S_Nation".into(), instances: nation_instances(nations, regions) },
        LevelData { level: "S_Region".into(), instances: region_instances(regions) },
    ]
}

/// Renders all six documents for a generated warehouse.
pub fn emit_warehouse(
    m: &WarehouseModel,
    dims: &DimensionSet,
    catsets: &[Vec<String>],
    tax: &CategoryTaxonomy,
    facts: &[Fact],
) -> Result<WarehouseDocuments, CodecError> {
    let model = NamedDoc { name: MODEL_DOC_NAME.to_string(), bytes: emit_model(m)? };
    let mut dimension_docs = Vec::with_capacity(m.dimensions.len());
    for d in &m.dimensions {
        let data = match d.id.as_str() {
            crate::model::DIM_DATE => date_level_data(&dims.calendar),
            crate::model::DIM_PART => part_level_data(&dims.parts, catsets, tax)?,
            crate::model::DIM_CUSTOMER => {
                customer_level_data(&dims.customers, &dims.nations, &dims.regions)
            }
            crate::model::DIM_SUPPLIER => {
                supplier_level_data(&dims.suppliers, &dims.nations, &dims.regions)
            }
            other => {
                return Err(CodecError::UnsupportedModel(format!(
                    "no emitter for dimension {other:?}"
                )))
            }
        };
        dimension_docs.push(NamedDoc { name: d.path.clone(), bytes: emit_dimension(d, &data)? });
    }
    let facts_doc = NamedDoc { name: m.fact.path.clone(), bytes: emit_facts(facts, &m.fact.id) };
    Ok(WarehouseDocuments { model, dimensions: dimension_docs, facts: facts_doc })
}
