//! The in-memory warehouse: typed dimension stores, category taxonomy and
//! fact stream, plus the key indices queries resolve references through.
//!
//! Two construction paths exist and must agree: [`Warehouse::from_generated`]
//! wraps freshly generated data, while [`Warehouse::assemble`] interprets
//! parsed documents. Dangling fact references are reported as warnings and
//! the facts retained; dimension documents are interpreted strictly.

use std::collections::HashMap;

use crate::codec::{CodecError, InstanceData, ParseWarning, ParsedDimension};
use crate::datagen::{
    Calendar, CategoryAssignment, Customer, Day, DimensionSet, Month, Nation, Part, Region,
    Supplier, Year,
};
use crate::fact::{Fact, Slot};
use crate::model::{WarehouseModel, DIM_CUSTOMER, DIM_DATE, DIM_PART, DIM_SUPPLIER};
use crate::taxonomy::CategoryTaxonomy;

#[derive(Debug, Clone)]
pub struct Warehouse {
    pub model: WarehouseModel,
    pub dims: DimensionSet,
    /// Category names per part, aligned with `dims.parts`.
    pub catsets: Vec<Vec<String>>,
    pub taxonomy: CategoryTaxonomy,
    pub facts: Vec<Fact>,
    customer_idx: HashMap<i64, usize>,
    supplier_idx: HashMap<i64, usize>,
    part_idx: HashMap<i64, usize>,
    day_idx: HashMap<i64, usize>,
}

impl Warehouse {
    /// Wraps the output of a generation run.
    pub fn from_generated(
        model: WarehouseModel,
        dims: DimensionSet,
        assign: &CategoryAssignment,
        taxonomy: CategoryTaxonomy,
        facts: Vec<Fact>,
    ) -> Warehouse {
        let catsets = assign
            .catsets
            .iter()
            .map(|cs| cs.iter().map(|s| s.to_string()).collect())
            .collect();
        Warehouse::index(model, dims, catsets, taxonomy, facts)
    }

    fn index(
        model: WarehouseModel,
        dims: DimensionSet,
        catsets: Vec<Vec<String>>,
        taxonomy: CategoryTaxonomy,
        facts: Vec<Fact>,
    ) -> Warehouse {
        let customer_idx = dims.customers.iter().enumerate().map(|(i, c)| (c.key, i)).collect();
        let supplier_idx = dims.suppliers.iter().enumerate().map(|(i, s)| (s.key, i)).collect();
        let part_idx = dims.parts.iter().enumerate().map(|(i, p)| (p.key, i)).collect();
        let day_idx =
            dims.calendar.days.iter().enumerate().map(|(i, d)| (d.key, i)).collect();
        Warehouse {
            model,
            dims,
            catsets,
            taxonomy,
            facts,
            customer_idx,
            supplier_idx,
            part_idx,
            day_idx,
        }
    }

    /// Builds the warehouse from parsed documents. Pushes a
    /// [`ParseWarning::DanglingReference`] for every present fact slot that
    /// resolves to no member; such facts are retained.
    pub fn assemble(
        model: WarehouseModel,
        parsed: Vec<ParsedDimension>,
        facts: Vec<Fact>,
        warnings: &mut Vec<ParseWarning>,
    ) -> Result<Warehouse, CodecError> {
        check_supported(&model)?;
        if parsed.len() != model.dimensions.len() {
            return Err(CodecError::Inconsistent(format!(
                "{} dimension documents for {} model dimensions",
                parsed.len(),
                model.dimensions.len()
            )));
        }
        let mut calendar: Option<Calendar> = None;
        let mut customer_side: Option<(Vec<Region>, Vec<Nation>, Vec<Customer>)> = None;
        let mut supplier_side: Option<(Vec<Region>, Vec<Nation>, Vec<Supplier>)> = None;
        let mut part_side: Option<(Vec<Part>, Vec<Vec<String>>, CategoryTaxonomy)> = None;
        for (def, pd) in model.dimensions.iter().zip(&parsed) {
            let declared: Vec<&str> = def.levels.iter().map(|l| l.id.as_str()).collect();
            let found: Vec<&str> = pd.levels.iter().map(|l| l.level.as_str()).collect();
            if declared != found {
                return Err(CodecError::Inconsistent(format!(
                    "dimension {:?}: document levels {found:?} do not match declared {declared:?}",
                    def.id
                )));
            }
            match def.id.as_str() {
                DIM_DATE => calendar = Some(assemble_calendar(pd)?),
                DIM_PART => part_side = Some(assemble_parts(pd)?),
                DIM_CUSTOMER => customer_side = Some(assemble_customer_side(pd)?),
                DIM_SUPPLIER => supplier_side = Some(assemble_supplier_side(pd)?),
                other => return Err(CodecError::UnsupportedModel(format!("dimension {other:?}"))),
            }
        }
        let calendar = calendar.expect("checked by check_supported");
        let (regions, nations, customers) = customer_side.expect("checked by check_supported");
        let (s_regions, s_nations, suppliers) = supplier_side.expect("checked by check_supported");
        let (parts, catsets, taxonomy) = part_side.expect("checked by check_supported");

        // Both geographic hierarchies must describe the same catalog: the
        // warehouse keeps a single nation/region store.
        if s_regions != regions || s_nations != nations {
            return Err(CodecError::Inconsistent(
                "customer and supplier documents disagree on nations or regions".into(),
            ));
        }

        let dims = DimensionSet { regions, nations, customers, suppliers, parts, calendar };
        check_unique_keys(&dims)?;
        let w = Warehouse::index(model, dims, catsets, taxonomy, facts);
        for (i, f) in w.facts.iter().enumerate() {
            for (slot, idx) in [
                (Slot::CustKey, &w.customer_idx),
                (Slot::PartKey, &w.part_idx),
                (Slot::SuppKey, &w.supplier_idx),
                (Slot::DateKey, &w.day_idx),
            ] {
                if let Some(key) = f.get(slot) {
                    if !idx.contains_key(&key) {
                        warnings.push(ParseWarning::DanglingReference {
                            fact_index: i as u64,
                            slot,
                            key,
                        });
                    }
                }
            }
        }
        Ok(w)
    }

    pub fn customer_by_key(&self, key: i64) -> Option<&Customer> {
        self.customer_idx.get(&key).map(|&i| &self.dims.customers[i])
    }

    pub fn supplier_by_key(&self, key: i64) -> Option<&Supplier> {
        self.supplier_idx.get(&key).map(|&i| &self.dims.suppliers[i])
    }

    pub fn part_index_by_key(&self, key: i64) -> Option<usize> {
        self.part_idx.get(&key).copied()
    }

    pub fn part_by_key(&self, key: i64) -> Option<&Part> {
        self.part_index_by_key(key).map(|i| &self.dims.parts[i])
    }

    pub fn day_by_key(&self, key: i64) -> Option<&Day> {
        self.day_idx.get(&key).map(|&i| &self.dims.calendar.days[i])
    }

    pub fn month_of(&self, day: &Day) -> &Month {
        &self.dims.calendar.months[day.month]
    }

    pub fn year_of(&self, month: &Month) -> &Year {
        &self.dims.calendar.years[month.year]
    }

    pub fn nation_of_customer(&self, c: &Customer) -> &Nation {
        &self.dims.nations[c.nation]
    }

    pub fn nation_of_supplier(&self, s: &Supplier) -> &Nation {
        &self.dims.nations[s.nation]
    }

    pub fn region_of(&self, n: &Nation) -> &Region {
        &self.dims.regions[n.region]
    }

    /// Category names assigned to the part at `part_index`.
    pub fn catset(&self, part_index: usize) -> &[String] {
        &self.catsets[part_index]
    }

    /// Equality up to fact slot order, which is not semantic after parsing.
    pub fn logically_equal(&self, other: &Warehouse) -> bool {
        self.model == other.model
            && self.dims == other.dims
            && self.catsets == other.catsets
            && self.taxonomy == other.taxonomy
            && self.facts.len() == other.facts.len()
            && self.facts.iter().zip(&other.facts).all(|(a, b)| a.logical_eq(b))
    }
}

/// Runs the full generation pipeline — dimensions, category assignment, fact
/// stream — and wraps the result, buffering all facts in memory. Callers that
/// need constant-memory output should drive the fact generator into a
/// streaming sink instead.
pub fn generate_warehouse(
    gp: &crate::datagen::GenParams,
    taxonomy: CategoryTaxonomy,
) -> Result<(Warehouse, crate::datagen::FactGenStats), crate::datagen::DatagenError> {
    use crate::datagen::{
        assign_categories, generate_dimensions, generate_facts, stage_rng, GenStage,
    };
    let dims = generate_dimensions(gp)?;
    let assign = assign_categories(
        dims.parts.len(),
        &taxonomy,
        &mut stage_rng(gp.seed, GenStage::Assignment),
    );
    let mut facts = Vec::new();
    let stats =
        generate_facts(&dims, &assign, gp, &mut stage_rng(gp.seed, GenStage::Facts), &mut facts)?;
    let model = crate::model::build_default_model();
    Ok((Warehouse::from_generated(model, dims, &assign, taxonomy, facts), stats))
}

/// The typed warehouse understands exactly the stock star schema; anything
/// else must be handled generically by a real backend.
fn check_supported(model: &WarehouseModel) -> Result<(), CodecError> {
    const EXPECTED: [(&str, &[&str]); 4] = [
        (DIM_DATE, &["Day", "Month", "Year"]),
        (DIM_PART, &["Part", "Category"]),
        (DIM_CUSTOMER, &["Customer", "C_Nation", "C_Region"]),
        (DIM_SUPPLIER, &["Supplier", "S_Nation", "S_Region"]),
    ];
    for (id, levels) in EXPECTED {
        let Some(d) = model.dimension(id) else {
            return Err(CodecError::UnsupportedModel(format!("missing dimension {id:?}")));
        };
        let found: Vec<&str> = d.levels.iter().map(|l| l.id.as_str()).collect();
        if found != levels {
            return Err(CodecError::UnsupportedModel(format!(
                "dimension {id:?} has levels {found:?}, expected {levels:?}"
            )));
        }
    }
    if model.dimensions.len() != 4 {
        return Err(CodecError::UnsupportedModel(format!(
            "{} dimensions, expected 4",
            model.dimensions.len()
        )));
    }
    Ok(())
}

fn check_unique_keys(dims: &DimensionSet) -> Result<(), CodecError> {
    fn check<'a>(
        what: &str,
        keys: impl Iterator<Item = i64> + 'a,
    ) -> Result<(), CodecError> {
        let mut seen = std::collections::HashSet::new();
        for k in keys {
            if !seen.insert(k) {
                return Err(CodecError::Inconsistent(format!("duplicate {what} key {k}")));
            }
        }
        Ok(())
    }
    check("customer", dims.customers.iter().map(|c| c.key))?;
    check("supplier", dims.suppliers.iter().map(|s| s.key))?;
    check("part", dims.parts.iter().map(|p| p.key))?;
    check("day", dims.calendar.days.iter().map(|d| d.key))?;
    check("month", dims.calendar.months.iter().map(|m| m.key))?;
    check("year", dims.calendar.years.iter().map(|y| y.key))?;
    Ok(())
}

fn attr<'a>(inst: &'a InstanceData, name: &str) -> Option<&'a str> {
    inst.attrs.iter().find(|(k, _)| k == name).map(|(_, v)| v.as_str())
}

fn req_attr(
    dim: &str,
    level: &str,
    inst: &InstanceData,
    name: &'static str,
) -> Result<String, CodecError> {
    attr(inst, name).map(str::to_string).ok_or_else(|| CodecError::MissingAttr {
        dimension: dim.to_string(),
        level: level.to_string(),
        instance: inst.id.clone(),
        attr: name,
    })
}

fn bad_value(
    dim: &str,
    level: &str,
    inst: &InstanceData,
    name: &'static str,
    text: &str,
) -> CodecError {
    CodecError::BadValue {
        dimension: dim.to_string(),
        level: level.to_string(),
        instance: inst.id.clone(),
        attr: name,
        text: text.to_string(),
    }
}

fn int_attr(
    dim: &str,
    level: &str,
    inst: &InstanceData,
    name: &'static str,
) -> Result<i64, CodecError> {
    let t = req_attr(dim, level, inst, name)?;
    t.trim().parse().map_err(|_| bad_value(dim, level, inst, name, &t))
}

fn money_attr(
    dim: &str,
    level: &str,
    inst: &InstanceData,
    name: &'static str,
) -> Result<i64, CodecError> {
    let t = req_attr(dim, level, inst, name)?;
    crate::value::parse_cents(t.trim()).ok_or_else(|| bad_value(dim, level, inst, name, &t))
}

/// The structural instance id, parsed as a key.
fn id_key(dim: &str, level: &str, inst: &InstanceData) -> Result<i64, CodecError> {
    inst.id.trim().parse().map_err(|_| bad_value(dim, level, inst, "id", &inst.id))
}

fn single_parent<'a>(
    dim: &str,
    level: &str,
    inst: &'a InstanceData,
) -> Result<&'a str, CodecError> {
    match inst.parents.as_slice() {
        [p] => Ok(p),
        [] => Err(CodecError::MissingParentRef {
            dimension: dim.to_string(),
            level: level.to_string(),
            instance: inst.id.clone(),
        }),
        _ => Err(CodecError::Inconsistent(format!(
            "{dim} {level} instance {:?} has {} parents, expected one",
            inst.id,
            inst.parents.len()
        ))),
    }
}

fn resolve_parent(
    map: &HashMap<&str, usize>,
    dim: &str,
    level: &str,
    inst: &InstanceData,
    parent: &str,
) -> Result<usize, CodecError> {
    map.get(parent).copied().ok_or_else(|| CodecError::Orphan {
        dimension: dim.to_string(),
        level: level.to_string(),
        instance: inst.id.clone(),
        parent: parent.to_string(),
    })
}

fn id_map(level: &crate::codec::LevelData) -> HashMap<&str, usize> {
    level.instances.iter().enumerate().map(|(i, inst)| (inst.id.as_str(), i)).collect()
}

fn assemble_calendar(pd: &ParsedDimension) -> Result<Calendar, CodecError> {
    let dim = &pd.id;
    let (day_ld, month_ld, year_ld) = (&pd.levels[0], &pd.levels[1], &pd.levels[2]);
    let years: Vec<Year> = year_ld
        .instances
        .iter()
        .map(|inst| Ok(Year { key: int_attr(dim, "Year", inst, "y_yearkey")? }))
        .collect::<Result<_, CodecError>>()?;
    let year_ids = id_map(year_ld);
    let months: Vec<Month> = month_ld
        .instances
        .iter()
        .map(|inst| {
            let monthkey = int_attr(dim, "Month", inst, "m_monthkey")?;
            if !(1..=12).contains(&monthkey) {
                return Err(bad_value(dim, "Month", inst, "m_monthkey", &monthkey.to_string()));
            }
            let parent = single_parent(dim, "Month", inst)?;
            Ok(Month {
                key: id_key(dim, "Month", inst)?,
                monthkey,
                monthname: req_attr(dim, "Month", inst, "m_monthname")?,
                year: resolve_parent(&year_ids, dim, "Month", inst, parent)?,
            })
        })
        .collect::<Result<_, CodecError>>()?;
    let month_ids = id_map(month_ld);
    let days: Vec<Day> = day_ld
        .instances
        .iter()
        .map(|inst| {
            let parent = single_parent(dim, "Day", inst)?;
            Ok(Day {
                key: int_attr(dim, "Day", inst, "d_datekey")?,
                dayname: req_attr(dim, "Day", inst, "d_dayname")?,
                month: resolve_parent(&month_ids, dim, "Day", inst, parent)?,
            })
        })
        .collect::<Result<_, CodecError>>()?;
    Ok(Calendar { days, months, years })
}

fn assemble_parts(
    pd: &ParsedDimension,
) -> Result<(Vec<Part>, Vec<Vec<String>>, CategoryTaxonomy), CodecError> {
    let dim = &pd.id;
    let (part_ld, cat_ld) = (&pd.levels[0], &pd.levels[1]);
    let mut cat_names = Vec::with_capacity(cat_ld.instances.len());
    for inst in &cat_ld.instances {
        let name = req_attr(dim, "Category", inst, "t_name")?;
        // The hierarchy walk at query time relies on every category being a
        // vocabulary member, so reject strays here rather than later.
        if crate::taxonomy::level_of(&name).is_none() {
            return Err(bad_value(dim, "Category", inst, "t_name", &name));
        }
        cat_names.push(name);
    }
    let cat_ids = id_map(cat_ld);
    let mut edges = Vec::new();
    for (inst, name) in cat_ld.instances.iter().zip(&cat_names) {
        for p in &inst.parents {
            let pi = resolve_parent(&cat_ids, dim, "Category", inst, p)?;
            edges.push((name.clone(), cat_names[pi].clone()));
        }
    }
    let taxonomy = CategoryTaxonomy::from_edges(edges)?;
    let mut parts = Vec::with_capacity(part_ld.instances.len());
    let mut catsets = Vec::with_capacity(part_ld.instances.len());
    for inst in &part_ld.instances {
        parts.push(Part {
            key: int_attr(dim, "Part", inst, "p_partkey")?,
            name: req_attr(dim, "Part", inst, "p_name")?,
            brand: req_attr(dim, "Part", inst, "p_brand")?,
            retailprice_cents: money_attr(dim, "Part", inst, "p_retailprice")?,
            size: int_attr(dim, "Part", inst, "p_size")?,
        });
        if inst.parents.is_empty() {
            return Err(CodecError::MissingParentRef {
                dimension: dim.to_string(),
                level: "Part".to_string(),
                instance: inst.id.clone(),
            });
        }
        let mut catset = Vec::with_capacity(inst.parents.len());
        for p in &inst.parents {
            let pi = resolve_parent(&cat_ids, dim, "Part", inst, p)?;
            catset.push(cat_names[pi].clone());
        }
        catsets.push(catset);
    }
    Ok((parts, catsets, taxonomy))
}

fn assemble_geography(
    pd: &ParsedDimension,
    nation_level: &'static str,
    region_level: &'static str,
) -> Result<(Vec<Region>, Vec<Nation>), CodecError> {
    let dim = &pd.id;
    let (nation_ld, region_ld) = (&pd.levels[1], &pd.levels[2]);
    let regions: Vec<Region> = region_ld
        .instances
        .iter()
        .map(|inst| {
            Ok(Region {
                key: id_key(dim, region_level, inst)?,
                name: req_attr(dim, region_level, inst, "r_name")?,
            })
        })
        .collect::<Result<_, CodecError>>()?;
    let region_ids = id_map(region_ld);
    let nations: Vec<Nation> = nation_ld
        .instances
        .iter()
        .map(|inst| {
            let parent = single_parent(dim, nation_level, inst)?;
            Ok(Nation {
                key: id_key(dim, nation_level, inst)?,
                name: req_attr(dim, nation_level, inst, "n_name")?,
                region: resolve_parent(&region_ids, dim, nation_level, inst, parent)?,
            })
        })
        .collect::<Result<_, CodecError>>()?;
    Ok((regions, nations))
}

fn assemble_customer_side(
    pd: &ParsedDimension,
) -> Result<(Vec<Region>, Vec<Nation>, Vec<Customer>), CodecError> {
    let dim = &pd.id;
    let (regions, nations) = assemble_geography(pd, "C_Nation", "C_Region")?;
    let nation_ids = id_map(&pd.levels[1]);
    let customers: Vec<Customer> = pd.levels[0]
        .instances
        .iter()
        .map(|inst| {
            let parent = single_parent(dim, "Customer", inst)?;
            Ok(Customer {
                key: int_attr(dim, "Customer", inst, "c_custkey")?,
                name: req_attr(dim, "Customer", inst, "c_name")?,
                acctbal_cents: money_attr(dim, "Customer", inst, "c_acctbal")?,
                mktsegment: req_attr(dim, "Customer", inst, "c_mktsegment")?,
                nation: resolve_parent(&nation_ids, dim, "Customer", inst, parent)?,
            })
        })
        .collect::<Result<_, CodecError>>()?;
    Ok((regions, nations, customers))
}

fn assemble_supplier_side(
    pd: &ParsedDimension,
) -> Result<(Vec<Region>, Vec<Nation>, Vec<Supplier>), CodecError> {
    let dim = &pd.id;
    let (regions, nations) = assemble_geography(pd, "S_Nation", "S_Region")?;
    let nation_ids = id_map(&pd.levels[1]);
    let suppliers: Vec<Supplier> = pd.levels[0]
        .instances
        .iter()
        .map(|inst| {
            let parent = single_parent(dim, "Supplier", inst)?;
            Ok(Supplier {
                key: int_attr(dim, "Supplier", inst, "s_suppkey")?,
                name: req_attr(dim, "Supplier", inst, "s_name")?,
                acctbal_cents: money_attr(dim, "Supplier", inst, "s_acctbal")?,
                nation: resolve_parent(&nation_ids, dim, "Supplier", inst, parent)?,
            })
        })
        .collect::<Result<_, CodecError>>()?;
    Ok((regions, nations, suppliers))
}
