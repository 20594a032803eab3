//! Brute-force cross-check oracle for the reference engine.
//!
//! This module re-derives the evaluation semantics with deliberately
//! different machinery: facts are flattened into wide tuples via linear
//! member scans (no key indexes), groups live in a linear list, category
//! rollups re-walk the parent edges, rounding is rebuilt from quotient and
//! remainder, and the quarter function is rewritten. It shares only data
//! shapes with the engine — [`QuerySpec`], [`Value`], [`QueryResult`] —
//! never evaluation code, so agreement between the two is evidence, not
//! tautology. Inputs are capped to keep the quadratic bits harmless.

use thiserror::Error;

use super::QueryResult;
use crate::model::Attribute;
use crate::value::Value;
use crate::warehouse::Warehouse;
use crate::workload::{AggFunc, CmpOp, Measure, Predicate, QuerySpec, SortDir};

/// The oracle refuses warehouses with more facts than this.
pub const ORACLE_FACT_LIMIT: usize = 10_000;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("oracle refuses {facts} facts (limit {limit})")]
    TooLarge { facts: usize, limit: usize },
}

/// One fully-joined fact: every attribute the workload can reference.
#[derive(Default)]
struct Tuple {
    c_custkey: Option<i64>,
    c_name: Option<String>,
    c_acctbal: Option<i64>,
    c_mktsegment: Option<String>,
    n_name: Option<String>,
    r_name: Option<String>,
    p_partkey: Option<i64>,
    p_name: Option<String>,
    p_brand: Option<String>,
    p_retailprice: Option<i64>,
    p_size: Option<i64>,
    cats: Option<Vec<String>>,
    s_suppkey: Option<i64>,
    s_name: Option<String>,
    s_acctbal: Option<i64>,
    d_datekey: Option<i64>,
    d_dayname: Option<String>,
    m_monthkey: Option<i64>,
    m_monthname: Option<String>,
    y_yearkey: Option<i64>,
    f_quantity: Option<i64>,
    f_totalamount: Option<i64>,
}

fn flatten(w: &Warehouse) -> Vec<Tuple> {
    let dims = &w.dims;
    w.facts
        .iter()
        .map(|f| {
            let mut t = Tuple {
                f_quantity: f.quantity,
                f_totalamount: f.total_cents,
                ..Tuple::default()
            };
            if let Some(c) = dims.customers.iter().find(|c| Some(c.key) == f.custkey) {
                t.c_custkey = Some(c.key);
                t.c_name = Some(c.name.clone());
                t.c_acctbal = Some(c.acctbal_cents);
                t.c_mktsegment = Some(c.mktsegment.clone());
                let n = &dims.nations[c.nation];
                t.n_name = Some(n.name.clone());
                t.r_name = Some(dims.regions[n.region].name.clone());
            }
            if let Some(i) = dims.parts.iter().position(|p| Some(p.key) == f.partkey) {
                let p = &dims.parts[i];
                t.p_partkey = Some(p.key);
                t.p_name = Some(p.name.clone());
                t.p_brand = Some(p.brand.clone());
                t.p_retailprice = Some(p.retailprice_cents);
                t.p_size = Some(p.size);
                t.cats = Some(w.catset(i).to_vec());
            }
            if let Some(s) = dims.suppliers.iter().find(|s| Some(s.key) == f.suppkey) {
                t.s_suppkey = Some(s.key);
                t.s_name = Some(s.name.clone());
                t.s_acctbal = Some(s.acctbal_cents);
            }
            if let Some(d) = dims.calendar.days.iter().find(|d| Some(d.key) == f.datekey) {
                t.d_datekey = Some(d.key);
                t.d_dayname = Some(d.dayname.clone());
                let m = &dims.calendar.months[d.month];
                t.m_monthkey = Some(m.monthkey);
                t.m_monthname = Some(m.monthname.clone());
                t.y_yearkey = Some(dims.calendar.years[m.year].key);
            }
            t
        })
        .collect()
}

fn get(t: &Tuple, a: Attribute) -> Option<Value> {
    use Attribute::*;
    match a {
        CCustKey => t.c_custkey.map(Value::Int),
        CName => t.c_name.clone().map(Value::Str),
        CAcctBal => t.c_acctbal.map(Value::Dec),
        CMktSegment => t.c_mktsegment.clone().map(Value::Str),
        NName => t.n_name.clone().map(Value::Str),
        RName => t.r_name.clone().map(Value::Str),
        PPartKey => t.p_partkey.map(Value::Int),
        PName => t.p_name.clone().map(Value::Str),
        PBrand => t.p_brand.clone().map(Value::Str),
        PRetailPrice => t.p_retailprice.map(Value::Dec),
        PSize => t.p_size.map(Value::Int),
        TName => None,
        SSuppKey => t.s_suppkey.map(Value::Int),
        SName => t.s_name.clone().map(Value::Str),
        SAcctBal => t.s_acctbal.map(Value::Dec),
        DDateKey => t.d_datekey.map(Value::Int),
        DDayName => t.d_dayname.clone().map(Value::Str),
        MMonthKey => t.m_monthkey.map(Value::Int),
        MMonthName => t.m_monthname.clone().map(Value::Str),
        YYearKey => t.y_yearkey.map(Value::Int),
        FQuantity => t.f_quantity.map(Value::Int),
        FTotalAmount => t.f_totalamount.map(Value::Dec),
    }
}

fn leaves(p: &Predicate) -> Vec<&Predicate> {
    match p {
        Predicate::All(ps) => ps.iter().flat_map(leaves).collect(),
        leaf => vec![leaf],
    }
}

fn referenced(q: &QuerySpec) -> Vec<Attribute> {
    let mut attrs: Vec<Attribute> = q.group_by.clone();
    attrs.extend(q.ordering.iter().map(|&(a, _)| a));
    if let Some(r) = &q.restriction {
        for leaf in leaves(r) {
            match *leaf {
                Predicate::Cmp { attr, .. } | Predicate::QuarterEq { attr, .. } => attrs.push(attr),
                Predicate::All(_) => {}
            }
        }
    }
    attrs
}

fn compare(v: &Value, op: CmpOp, lit: &Value) -> Option<bool> {
    let ord = match (v, lit) {
        (Value::Int(a), Value::Int(b)) => a.cmp(b),
        (Value::Dec(a), Value::Dec(b)) => a.cmp(b),
        (Value::Str(a), Value::Str(b)) => a.cmp(b),
        _ => return None,
    };
    Some(match op {
        CmpOp::Eq => ord.is_eq(),
        CmpOp::Lt => ord.is_lt(),
        CmpOp::Le => ord.is_le(),
        CmpOp::Gt => ord.is_gt(),
        CmpOp::Ge => ord.is_ge(),
    })
}

fn own_quarter(mk: i64) -> i64 {
    ((mk - 1) / 3) + 1
}

/// Half-up rounding rebuilt from euclidean quotient and remainder.
fn own_half_up(num: i128, den: i128) -> i128 {
    let q = num.div_euclid(den);
    let r = num.rem_euclid(den);
    if 2 * r >= den {
        q + 1
    } else {
        q
    }
}

fn tops_walk(w: &Warehouse, name: &str, out: &mut Vec<String>) {
    let parents = w.taxonomy.parents(name);
    if parents.is_empty() {
        if !out.iter().any(|t| t == name) {
            out.push(name.to_string());
        }
        return;
    }
    for p in parents {
        tops_walk(w, p, out);
    }
}

struct Bucket {
    key: Vec<Value>,
    quantities: Vec<i64>,
    amounts: Vec<i64>,
    /// All observed values per non-key ordering attribute.
    ord_vals: Vec<Vec<Value>>,
}

/// Evaluates a query by brute force.
pub fn evaluate_oracle(w: &Warehouse, q: &QuerySpec) -> Result<QueryResult, OracleError> {
    if w.facts.len() > ORACLE_FACT_LIMIT {
        return Err(OracleError::TooLarge { facts: w.facts.len(), limit: ORACLE_FACT_LIMIT });
    }
    let tuples = flatten(w);
    let refs = referenced(q);
    let t_pos = q.group_by.iter().position(|&a| a == Attribute::TName);
    let mut t_conds: Vec<(CmpOp, Value)> = Vec::new();
    let mut plain: Vec<&Predicate> = Vec::new();
    if let Some(r) = &q.restriction {
        for leaf in leaves(r) {
            match leaf {
                Predicate::Cmp { attr, op, value } if *attr == Attribute::TName => {
                    t_conds.push((*op, value.clone()));
                }
                other => plain.push(other),
            }
        }
    }
    let mut ord_extra: Vec<Attribute> = Vec::new();
    for &(a, _) in &q.ordering {
        if !q.group_by.contains(&a) && !ord_extra.contains(&a) {
            ord_extra.push(a);
        }
    }

    let mut buckets: Vec<Bucket> = Vec::new();
    for t in &tuples {
        let defined = refs.iter().all(|&a| {
            if a.is_measure() {
                true
            } else if a == Attribute::TName {
                t.cats.is_some()
            } else {
                get(t, a).is_some()
            }
        });
        if !defined {
            continue;
        }
        let passes = plain.iter().all(|leaf| match leaf {
            Predicate::Cmp { attr, op, value } => {
                get(t, *attr).and_then(|v| compare(&v, *op, value)).unwrap_or(false)
            }
            Predicate::QuarterEq { attr, quarter } => match get(t, *attr) {
                Some(Value::Int(mk)) => own_quarter(mk) == *quarter,
                _ => false,
            },
            Predicate::All(_) => unreachable!("leaves() flattens conjunctions"),
        });
        if !passes {
            continue;
        }
        let cat_pass = |c: &str| {
            t_conds
                .iter()
                .all(|(op, lit)| compare(&Value::str(c), *op, lit).unwrap_or(false))
        };
        if t_pos.is_none() && !t_conds.is_empty() {
            let cats = t.cats.as_deref().unwrap_or(&[]);
            if !cats.iter().any(|c| cat_pass(c)) {
                continue;
            }
        }

        let keys: Vec<Vec<Value>> = match t_pos {
            None => {
                let key: Option<Vec<Value>> = q.group_by.iter().map(|&a| get(t, a)).collect();
                match key {
                    Some(k) => vec![k],
                    None => continue,
                }
            }
            Some(pos) => {
                let mut cat_keys: Vec<String> = Vec::new();
                for c in t.cats.as_deref().unwrap_or(&[]) {
                    if !cat_pass(c) {
                        continue;
                    }
                    if q.hierarchy_depth == 0 {
                        if !cat_keys.iter().any(|k| k == c) {
                            cat_keys.push(c.clone());
                        }
                    } else {
                        tops_walk(w, c, &mut cat_keys);
                    }
                }
                let mut keys = Vec::with_capacity(cat_keys.len());
                for c in cat_keys {
                    let mut key = Vec::with_capacity(q.group_by.len());
                    let mut ok = true;
                    for (i, &a) in q.group_by.iter().enumerate() {
                        if i == pos {
                            key.push(Value::Str(c.clone()));
                        } else {
                            match get(t, a) {
                                Some(v) => key.push(v),
                                None => ok = false,
                            }
                        }
                    }
                    if ok {
                        keys.push(key);
                    }
                }
                keys
            }
        };

        for key in keys {
            let bucket = match buckets.iter_mut().find(|b| b.key == key) {
                Some(b) => b,
                None => {
                    buckets.push(Bucket {
                        key,
                        quantities: Vec::new(),
                        amounts: Vec::new(),
                        ord_vals: vec![Vec::new(); ord_extra.len()],
                    });
                    buckets.last_mut().expect("just pushed")
                }
            };
            if let Some(v) = t.f_quantity {
                bucket.quantities.push(v);
            }
            if let Some(v) = t.f_totalamount {
                bucket.amounts.push(v);
            }
            for (j, &a) in ord_extra.iter().enumerate() {
                if let Some(v) = get(t, a) {
                    bucket.ord_vals[j].push(v);
                }
            }
        }
    }

    let mut rows: Vec<(Vec<Value>, Vec<Option<Value>>, Vec<Value>)> = Vec::new();
    'buckets: for b in &buckets {
        let mut out = b.key.clone();
        for agg in &q.aggregations {
            let vals = match agg.measure {
                Measure::Quantity => &b.quantities,
                Measure::TotalAmount => &b.amounts,
            };
            if vals.is_empty() {
                continue 'buckets;
            }
            let wrap = |v: i64| match agg.measure {
                Measure::Quantity => Value::Int(v),
                Measure::TotalAmount => Value::Dec(v),
            };
            let sum: i128 = vals.iter().map(|&v| i128::from(v)).sum();
            out.push(match agg.func {
                AggFunc::Min => wrap(*vals.iter().min().expect("non-empty")),
                AggFunc::Max => wrap(*vals.iter().max().expect("non-empty")),
                AggFunc::Sum => wrap(i64::try_from(sum).expect("oracle sums fit i64 at capped scales")),
                AggFunc::Avg => {
                    let num = match agg.measure {
                        Measure::Quantity => sum * 100,
                        Measure::TotalAmount => sum,
                    };
                    let cents = own_half_up(num, vals.len() as i128);
                    Value::Dec(i64::try_from(cents).expect("oracle averages fit i64"))
                }
            });
        }
        let mins: Vec<Option<Value>> =
            b.ord_vals.iter().map(|vs| vs.iter().min().cloned()).collect();
        rows.push((b.key.clone(), mins, out));
    }

    rows.sort_by(|a, b| {
        for &(attr, dir) in &q.ordering {
            let ord = match q.group_by.iter().position(|&g| g == attr) {
                Some(i) => a.0[i].cmp(&b.0[i]),
                None => {
                    let j = ord_extra.iter().position(|&e| e == attr).expect("collected above");
                    a.1[j].cmp(&b.1[j])
                }
            };
            let ord = if matches!(dir, SortDir::Desc) { ord.reverse() } else { ord };
            if !ord.is_eq() {
                return ord;
            }
        }
        for i in 0..q.group_by.len() {
            let ord = a.0[i].cmp(&b.0[i]);
            if !ord.is_eq() {
                return ord;
            }
        }
        std::cmp::Ordering::Equal
    });

    Ok(QueryResult {
        columns: QueryResult::column_names(q),
        key_count: q.group_by.len(),
        rows: rows.into_iter().map(|(_, _, out)| out).collect(),
    })
}
