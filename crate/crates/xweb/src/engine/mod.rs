//! Reference in-memory evaluation of the workload.
//!
//! The semantics, stated once (the [`oracle`] re-derives them independently
//! for cross-checking):
//!
//! * A fact qualifies only if every dimension referenced by the query's
//!   grouping, restriction or ordering attributes resolves for it: the slot
//!   must be present and name an existing member.
//! * Category grouping (`t_name`) is per pair — a fact contributes once per
//!   distinct category key it matches. Category restrictions filter the raw
//!   assignments; with `hierarchy_depth` 1 the surviving assignments are then
//!   rolled to their topmost ancestors and de-duplicated. A category
//!   restriction without category grouping is existential.
//! * A group row is emitted only when every aggregate column saw at least one
//!   present measure value; missing measures never contribute.
//! * Sums and extrema of quantities are integers, monetary aggregates are
//!   decimals, and averages round half-up to cents.
//! * Rows sort by the declared ordering, then by the remaining grouping keys
//!   ascending. An ordering attribute outside the grouping key sorts by the
//!   group minimum of that attribute.

pub mod oracle;

use std::collections::HashMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fact::{Fact, Slot};
use crate::model::{Attribute, DimKind};
use crate::value::Value;
use crate::warehouse::Warehouse;
use crate::workload::{AggFunc, Aggregation, CmpOp, Measure, Predicate, QueryId, QuerySpec, SortDir};

/// Facts evaluated between deadline checks.
const DEADLINE_STRIDE: usize = 1024;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("{query} exceeded its evaluation deadline")]
    Timeout { query: QueryId },
    #[error("aggregate {column} does not fit a 64-bit value")]
    Overflow { column: String },
}

/// A materialized query result: grouping key columns first, then one column
/// per aggregation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryResult {
    pub columns: Vec<String>,
    /// How many leading columns are grouping keys.
    pub key_count: usize,
    pub rows: Vec<Vec<Value>>,
}

impl QueryResult {
    pub fn column_names(q: &QuerySpec) -> Vec<String> {
        q.group_by
            .iter()
            .map(|a| a.name().to_string())
            .chain(q.aggregations.iter().map(|a| a.column_name()))
            .collect()
    }

    /// CSV rendering with a header row; cells use document formatting.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns).expect("write csv header to memory");
        for row in &self.rows {
            w.write_record(row.iter().map(Value::render)).expect("write csv row to memory");
        }
        let bytes = w.into_inner().expect("flush csv to memory");
        String::from_utf8(bytes).expect("csv output is utf-8")
    }
}

pub fn evaluate(w: &Warehouse, q: &QuerySpec) -> Result<QueryResult, EngineError> {
    evaluate_with_deadline(w, q, None)
}

/// Evaluates one query; if `deadline` is given, evaluation aborts with
/// [`EngineError::Timeout`] once it passes.
pub fn evaluate_with_deadline(
    w: &Warehouse,
    q: &QuerySpec,
    deadline: Option<Instant>,
) -> Result<QueryResult, EngineError> {
    let required = required_dims(q);
    let (plain, t_conds) = split_restriction(q);
    let t_pos = q.group_by.iter().position(|&a| a == Attribute::TName);
    let mut ord_extra: Vec<Attribute> = Vec::new();
    for &(a, _) in &q.ordering {
        if !q.group_by.contains(&a) && !ord_extra.contains(&a) {
            ord_extra.push(a);
        }
    }

    let mut groups: HashMap<Vec<Value>, GroupAcc> = HashMap::new();
    for (i, f) in w.facts.iter().enumerate() {
        if i % DEADLINE_STRIDE == 0 {
            if let Some(d) = deadline {
                if Instant::now() > d {
                    return Err(EngineError::Timeout { query: q.id });
                }
            }
        }
        let Some(res) = resolve(w, f, &required) else { continue };
        if !plain.iter().all(|leaf| leaf.holds(w, &res, f)) {
            continue;
        }
        if t_pos.is_none() && !t_conds.is_empty() {
            let part = res.part.expect("category restriction makes the part dimension required");
            if !w.catset(part).iter().any(|c| t_conds.iter().all(|t| t.holds_on(c))) {
                continue;
            }
        }

        let mut base = Vec::with_capacity(q.group_by.len());
        let mut defined = true;
        for (pos, &a) in q.group_by.iter().enumerate() {
            if Some(pos) == t_pos {
                base.push(Value::Int(0)); // placeholder, replaced per category
            } else {
                match attr_value(w, &res, f, a) {
                    Some(v) => base.push(v),
                    None => {
                        defined = false;
                        break;
                    }
                }
            }
        }
        if !defined {
            continue;
        }

        let keys: Vec<Vec<Value>> = match t_pos {
            None => vec![base],
            Some(pos) => {
                let part = res.part.expect("category grouping makes the part dimension required");
                category_keys(w, part, q.hierarchy_depth, &t_conds)
                    .into_iter()
                    .map(|c| {
                        let mut k = base.clone();
                        k[pos] = Value::Str(c);
                        k
                    })
                    .collect()
            }
        };

        for key in keys {
            let acc = groups.entry(key).or_insert_with(|| GroupAcc::new(ord_extra.len()));
            if let Some(v) = f.get(Slot::Quantity) {
                acc.quantity.add(v);
            }
            if let Some(v) = f.get(Slot::TotalAmount) {
                acc.total.add(v);
            }
            for (j, &a) in ord_extra.iter().enumerate() {
                if let Some(v) = attr_value(w, &res, f, a) {
                    if acc.ord_mins[j].as_ref().is_none_or(|cur| v < *cur) {
                        acc.ord_mins[j] = Some(v);
                    }
                }
            }
        }
    }

    let mut rows: Vec<SortableRow> = Vec::with_capacity(groups.len());
    'groups: for (key, acc) in groups {
        let mut out = key.clone();
        for agg in &q.aggregations {
            match aggregate_value(*agg, &acc) {
                Some(v) => out.push(v?),
                None => continue 'groups, // an empty aggregate suppresses the row
            }
        }
        rows.push(SortableRow { key, ord_mins: acc.ord_mins, out });
    }
    sort_rows(&mut rows, q);

    Ok(QueryResult {
        columns: QueryResult::column_names(q),
        key_count: q.group_by.len(),
        rows: rows.into_iter().map(|r| r.out).collect(),
    })
}

/// Dimensions the query forces a fact to resolve.
fn required_dims(q: &QuerySpec) -> Vec<DimKind> {
    let mut dims = Vec::new();
    let mut note = |a: Attribute| {
        if let Some(k) = a.dimension() {
            if !dims.contains(&k) {
                dims.push(k);
            }
        }
    };
    q.group_by.iter().copied().for_each(&mut note);
    q.ordering.iter().for_each(|&(a, _)| note(a));
    if let Some(r) = &q.restriction {
        walk_leaves(r, &mut |leaf| match *leaf {
            Predicate::Cmp { attr, .. } | Predicate::QuarterEq { attr, .. } => note(attr),
            Predicate::All(_) => unreachable!("walk_leaves flattens conjunctions"),
        });
    }
    dims
}

fn walk_leaves<'p>(p: &'p Predicate, visit: &mut impl FnMut(&'p Predicate)) {
    match p {
        Predicate::All(ps) => ps.iter().for_each(|c| walk_leaves(c, visit)),
        leaf => visit(leaf),
    }
}

/// Restriction leaves split into fact-level conditions and conditions on a
/// single category name.
fn split_restriction(q: &QuerySpec) -> (Vec<PlainCond>, Vec<TCond>) {
    let mut plain = Vec::new();
    let mut t = Vec::new();
    if let Some(r) = &q.restriction {
        walk_leaves(r, &mut |leaf| match leaf {
            Predicate::Cmp { attr, op, value } if *attr == Attribute::TName => {
                t.push(TCond { op: *op, value: value.clone() });
            }
            Predicate::Cmp { attr, op, value } => {
                plain.push(PlainCond::Cmp { attr: *attr, op: *op, value: value.clone() });
            }
            Predicate::QuarterEq { attr, quarter } => {
                plain.push(PlainCond::QuarterEq { attr: *attr, quarter: *quarter });
            }
            Predicate::All(_) => unreachable!("walk_leaves flattens conjunctions"),
        });
    }
    (plain, t)
}

enum PlainCond {
    Cmp { attr: Attribute, op: CmpOp, value: Value },
    QuarterEq { attr: Attribute, quarter: i64 },
}

impl PlainCond {
    fn holds(&self, w: &Warehouse, res: &Resolved<'_>, f: &Fact) -> bool {
        match self {
            PlainCond::Cmp { attr, op, value } => match attr_value(w, res, f, *attr) {
                Some(v) => compare(&v, *op, value),
                None => false,
            },
            PlainCond::QuarterEq { attr, quarter } => match attr_value(w, res, f, *attr) {
                // Month numbers are range-checked on assembly, so this cannot
                // fall outside 1..=12.
                Some(Value::Int(mk)) => (mk + 2) / 3 == *quarter,
                _ => false,
            },
        }
    }
}

struct TCond {
    op: CmpOp,
    value: Value,
}

impl TCond {
    fn holds_on(&self, category: &str) -> bool {
        compare(&Value::str(category), self.op, &self.value)
    }
}

fn compare(v: &Value, op: CmpOp, lit: &Value) -> bool {
    use std::cmp::Ordering::*;
    let ord = v.cmp(lit);
    match op {
        CmpOp::Eq => ord == Equal,
        CmpOp::Lt => ord == Less,
        CmpOp::Le => ord != Greater,
        CmpOp::Gt => ord == Greater,
        CmpOp::Ge => ord != Less,
    }
}

/// Per-fact dimension resolution; only the required chains are looked up.
struct Resolved<'w> {
    customer: Option<&'w crate::datagen::Customer>,
    part: Option<usize>,
    supplier: Option<&'w crate::datagen::Supplier>,
    day: Option<&'w crate::datagen::Day>,
}

fn resolve<'w>(w: &'w Warehouse, f: &Fact, required: &[DimKind]) -> Option<Resolved<'w>> {
    let mut r = Resolved { customer: None, part: None, supplier: None, day: None };
    for k in required {
        match k {
            DimKind::Customer => r.customer = Some(w.customer_by_key(f.get(Slot::CustKey)?)?),
            DimKind::Part => r.part = Some(w.part_index_by_key(f.get(Slot::PartKey)?)?),
            DimKind::Supplier => r.supplier = Some(w.supplier_by_key(f.get(Slot::SuppKey)?)?),
            DimKind::Date => r.day = Some(w.day_by_key(f.get(Slot::DateKey)?)?),
        }
    }
    Some(r)
}

/// The value of an attribute for one resolved fact; `None` when the backing
/// slot or chain is absent. `t_name` is set-valued and handled by the caller.
fn attr_value(w: &Warehouse, r: &Resolved<'_>, f: &Fact, a: Attribute) -> Option<Value> {
    use Attribute::*;
    Some(match a {
        CCustKey => Value::Int(r.customer?.key),
        CName => Value::str(&*r.customer?.name),
        CAcctBal => Value::Dec(r.customer?.acctbal_cents),
        CMktSegment => Value::str(&*r.customer?.mktsegment),
        NName => Value::str(&*w.nation_of_customer(r.customer?).name),
        RName => Value::str(&*w.region_of(w.nation_of_customer(r.customer?)).name),
        PPartKey => Value::Int(w.dims.parts[r.part?].key),
        PName => Value::str(&*w.dims.parts[r.part?].name),
        PBrand => Value::str(&*w.dims.parts[r.part?].brand),
        PRetailPrice => Value::Dec(w.dims.parts[r.part?].retailprice_cents),
        PSize => Value::Int(w.dims.parts[r.part?].size),
        TName => return None,
        SSuppKey => Value::Int(r.supplier?.key),
        SName => Value::str(&*r.supplier?.name),
        SAcctBal => Value::Dec(r.supplier?.acctbal_cents),
        DDateKey => Value::Int(r.day?.key),
        DDayName => Value::str(&*r.day?.dayname),
        MMonthKey => Value::Int(w.month_of(r.day?).monthkey),
        MMonthName => Value::str(&*w.month_of(r.day?).monthname),
        YYearKey => Value::Int(w.year_of(w.month_of(r.day?)).key),
        FQuantity => Value::Int(f.get(Slot::Quantity)?),
        FTotalAmount => Value::Dec(f.get(Slot::TotalAmount)?),
    })
}

/// Distinct category keys a fact's part contributes to: raw assignments
/// filtered by the category conditions, rolled to the top when asked.
fn category_keys(w: &Warehouse, part: usize, depth: u8, t_conds: &[TCond]) -> Vec<String> {
    let mut keys: Vec<String> = Vec::new();
    for c in w.catset(part) {
        if !t_conds.iter().all(|t| t.holds_on(c)) {
            continue;
        }
        if depth == 0 {
            if !keys.contains(c) {
                keys.push(c.clone());
            }
        } else {
            let tops = w
                .taxonomy
                .supercategories(c)
                .expect("assembled category names are vocabulary members");
            for t in tops {
                if !keys.contains(&t) {
                    keys.push(t);
                }
            }
        }
    }
    keys
}

#[derive(Clone, Copy)]
struct MeasureAcc {
    count: u64,
    sum: i128,
    min: i64,
    max: i64,
}

impl MeasureAcc {
    fn new() -> Self {
        MeasureAcc { count: 0, sum: 0, min: i64::MAX, max: i64::MIN }
    }

    fn add(&mut self, v: i64) {
        self.count += 1;
        self.sum += i128::from(v);
        self.min = self.min.min(v);
        self.max = self.max.max(v);
    }
}

struct GroupAcc {
    quantity: MeasureAcc,
    total: MeasureAcc,
    /// Group minima of ordering attributes outside the grouping key.
    ord_mins: Vec<Option<Value>>,
}

impl GroupAcc {
    fn new(ord_len: usize) -> Self {
        GroupAcc { quantity: MeasureAcc::new(), total: MeasureAcc::new(), ord_mins: vec![None; ord_len] }
    }
}

/// `None` when the measure never appeared in the group.
fn aggregate_value(agg: Aggregation, acc: &GroupAcc) -> Option<Result<Value, EngineError>> {
    let m = match agg.measure {
        Measure::Quantity => &acc.quantity,
        Measure::TotalAmount => &acc.total,
    };
    if m.count == 0 {
        return None;
    }
    let wrap = |v: i64| match agg.measure {
        Measure::Quantity => Value::Int(v),
        Measure::TotalAmount => Value::Dec(v),
    };
    let overflow = || EngineError::Overflow { column: agg.column_name() };
    Some(match agg.func {
        AggFunc::Min => Ok(wrap(m.min)),
        AggFunc::Max => Ok(wrap(m.max)),
        AggFunc::Sum => i64::try_from(m.sum).map(wrap).map_err(|_| overflow()),
        AggFunc::Avg => {
            // Averages are decimals in cents, rounded half-up; a quantity
            // average scales to cents first.
            let num = match agg.measure {
                Measure::Quantity => m.sum * 100,
                Measure::TotalAmount => m.sum,
            };
            let den = i128::from(m.count);
            let cents = (2 * num + den).div_euclid(2 * den);
            i64::try_from(cents).map(Value::Dec).map_err(|_| overflow())
        }
    })
}

struct SortableRow {
    key: Vec<Value>,
    ord_mins: Vec<Option<Value>>,
    out: Vec<Value>,
}

fn sort_rows(rows: &mut [SortableRow], q: &QuerySpec) {
    enum Col {
        Key(usize),
        Extra(usize),
    }
    let mut cols: Vec<(Col, SortDir)> = Vec::new();
    let mut extra_seen: Vec<Attribute> = Vec::new();
    for &(a, dir) in &q.ordering {
        match q.group_by.iter().position(|&g| g == a) {
            Some(i) => cols.push((Col::Key(i), dir)),
            None => {
                let j = match extra_seen.iter().position(|&e| e == a) {
                    Some(j) => j,
                    None => {
                        extra_seen.push(a);
                        extra_seen.len() - 1
                    }
                };
                cols.push((Col::Extra(j), dir));
            }
        }
    }
    // Deterministic output: any grouping key not already ordered breaks ties
    // ascending.
    for i in 0..q.group_by.len() {
        if !q.ordering.iter().any(|&(a, _)| q.group_by.iter().position(|&g| g == a) == Some(i)) {
            cols.push((Col::Key(i), SortDir::Asc));
        }
    }
    rows.sort_by(|a, b| {
        for (col, dir) in &cols {
            let ord = match col {
                Col::Key(i) => a.key[*i].cmp(&b.key[*i]),
                Col::Extra(j) => a.ord_mins[*j].cmp(&b.ord_mins[*j]),
            };
            let ord = match dir {
                SortDir::Asc => ord,
                SortDir::Desc => ord.reverse(),
            };
            if ord != std::cmp::Ordering::Equal {
                return ord;
            }
        }
        std::cmp::Ordering::Equal
    });
}
