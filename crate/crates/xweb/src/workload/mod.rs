//! The twenty-query workload: five blocks of increasing complexity, from
//! plain reporting aggregates through one/two/three-dimensional cubes to the
//! queries that exercise the non-strict category hierarchy.
//!
//! Each query is a declarative [`QuerySpec`]; the FLWOR rendering lives in
//! [`render_xquery`] and the reference evaluation in [`crate::engine`].

mod xquery;

pub use xquery::render_xquery;

use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use thiserror::Error;

use crate::model::Attribute;
use crate::value::Value;

pub const QUERY_COUNT: u8 = 20;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum WorkloadError {
    #[error("invalid query id {0:?}")]
    BadQueryId(String),
    #[error("month key {0} outside 1..=12")]
    BadMonthKey(i64),
    #[error("invalid workload config: {0}")]
    BadConfig(String),
}

/// The five workload blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum QueryGroup {
    Reporting,
    Cube1D,
    Cube2D,
    Cube3D,
    ComplexHierarchy,
}

impl QueryGroup {
    pub fn code(self) -> &'static str {
        match self {
            QueryGroup::Reporting => "RE",
            QueryGroup::Cube1D => "1D",
            QueryGroup::Cube2D => "2D",
            QueryGroup::Cube3D => "3D",
            QueryGroup::ComplexHierarchy => "CH",
        }
    }

    pub fn all() -> [QueryGroup; 5] {
        [
            QueryGroup::Reporting,
            QueryGroup::Cube1D,
            QueryGroup::Cube2D,
            QueryGroup::Cube3D,
            QueryGroup::ComplexHierarchy,
        ]
    }
}

/// A query number 1..=20, displayed as `Q01`..`Q20`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QueryId(u8);

impl QueryId {
    pub fn new(n: u8) -> Result<QueryId, WorkloadError> {
        if (1..=QUERY_COUNT).contains(&n) {
            Ok(QueryId(n))
        } else {
            Err(WorkloadError::BadQueryId(n.to_string()))
        }
    }

    pub fn number(self) -> u8 {
        self.0
    }

    pub fn all() -> impl Iterator<Item = QueryId> {
        (1..=QUERY_COUNT).map(QueryId)
    }
}

impl fmt::Display for QueryId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Q{:02}", self.0)
    }
}

impl FromStr for QueryId {
    type Err = WorkloadError;

    /// Accepts `Q05`, `q5` or plain `5`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let digits = s.strip_prefix(['Q', 'q']).unwrap_or(s);
        digits
            .parse::<u8>()
            .ok()
            .and_then(|n| QueryId::new(n).ok())
            .ok_or_else(|| WorkloadError::BadQueryId(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AggFunc {
    Min,
    Max,
    Sum,
    Avg,
}

impl AggFunc {
    pub fn prefix(self) -> &'static str {
        match self {
            AggFunc::Min => "min",
            AggFunc::Max => "max",
            AggFunc::Sum => "sum",
            AggFunc::Avg => "avg",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Measure {
    Quantity,
    TotalAmount,
}

impl Measure {
    pub fn attribute(self) -> Attribute {
        match self {
            Measure::Quantity => Attribute::FQuantity,
            Measure::TotalAmount => Attribute::FTotalAmount,
        }
    }

    pub fn element_name(self) -> &'static str {
        self.attribute().name()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Aggregation {
    pub func: AggFunc,
    pub measure: Measure,
}

impl Aggregation {
    /// Result column name, e.g. `sum_f_quantity`.
    pub fn column_name(self) -> String {
        format!("{}_{}", self.func.prefix(), self.measure.element_name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Eq,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Predicate {
    /// Compare a dimension attribute against a constant.
    Cmp { attr: Attribute, op: CmpOp, value: Value },
    /// Calendar quarter of a month-number attribute equals `quarter`.
    QuarterEq { attr: Attribute, quarter: i64 },
    /// Conjunction.
    All(Vec<Predicate>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SortDir {
    Asc,
    Desc,
}

/// One workload query, fully declarative.
#[derive(Debug, Clone, PartialEq)]
pub struct QuerySpec {
    pub id: QueryId,
    pub group: QueryGroup,
    /// Grouping attributes; empty means one global row.
    pub group_by: Vec<Attribute>,
    pub aggregations: Vec<Aggregation>,
    pub restriction: Option<Predicate>,
    /// Ordering columns from the workload definition; attributes need not be
    /// grouping keys (they then order by the group minimum).
    pub ordering: Vec<(Attribute, SortDir)>,
    /// How far category grouping keys are rolled up the complex hierarchy:
    /// 0 groups by the categories as assigned, 1 by their topmost ancestors.
    pub hierarchy_depth: u8,
}

/// Calendar quarter 1..=4 for a month number 1..=12.
pub fn quarter(monthkey: i64) -> Result<i64, WorkloadError> {
    if !(1..=12).contains(&monthkey) {
        return Err(WorkloadError::BadMonthKey(monthkey));
    }
    Ok((monthkey + 2) / 3)
}

fn agg(func: AggFunc, measure: Measure) -> Aggregation {
    Aggregation { func, measure }
}

fn both(func: AggFunc) -> Vec<Aggregation> {
    vec![agg(func, Measure::Quantity), agg(func, Measure::TotalAmount)]
}

fn cmp(attr: Attribute, op: CmpOp, value: Value) -> Predicate {
    Predicate::Cmp { attr, op, value }
}

fn str_val(s: &str) -> Value {
    Value::Str(s.to_string())
}

fn asc(attrs: &[Attribute]) -> Vec<(Attribute, SortDir)> {
    attrs.iter().map(|&a| (a, SortDir::Asc)).collect()
}

/// The workload definition for one query id.
pub fn query_spec(id: QueryId) -> QuerySpec {
    use Attribute::*;
    let quarter_one = Predicate::QuarterEq { attr: MMonthKey, quarter: 1 };
    let brand25 = cmp(PBrand, CmpOp::Eq, str_val("Brand#25"));
    let big_parts = cmp(PSize, CmpOp::Gt, Value::Int(40));
    let brushed = cmp(TName, CmpOp::Eq, str_val("BRUSHED"));
    let cube3 = vec![CName, PName, YYearKey];
    let (group, group_by, aggregations, restriction, ordering, depth): (
        QueryGroup,
        Vec<Attribute>,
        Vec<Aggregation>,
        Option<Predicate>,
        Vec<(Attribute, SortDir)>,
        u8,
    ) = match id.number() {
        1 => (
            QueryGroup::Reporting,
            vec![],
            [AggFunc::Min, AggFunc::Max, AggFunc::Sum, AggFunc::Avg]
                .into_iter()
                .flat_map(both)
                .collect(),
            None,
            vec![],
            0,
        ),
        2 => (
            QueryGroup::Reporting,
            vec![PPartKey],
            vec![agg(AggFunc::Sum, Measure::Quantity)],
            Some(cmp(PRetailPrice, CmpOp::Le, Value::Dec(100_000))),
            asc(&[PRetailPrice]),
            0,
        ),
        3 => (
            QueryGroup::Reporting,
            vec![],
            vec![agg(AggFunc::Sum, Measure::TotalAmount)],
            Some(cmp(NName, CmpOp::Eq, str_val("FRANCE"))),
            vec![],
            0,
        ),
        4 => (
            QueryGroup::Cube1D,
            vec![PPartKey],
            vec![agg(AggFunc::Sum, Measure::Quantity)],
            Some(cmp(PRetailPrice, CmpOp::Gt, Value::Dec(150_000))),
            vec![(PRetailPrice, SortDir::Desc)],
            0,
        ),
        5 => (
            QueryGroup::Cube1D,
            vec![MMonthName],
            both(AggFunc::Sum),
            Some(quarter_one),
            asc(&[MMonthName]),
            0,
        ),
        6 => (
            QueryGroup::Cube1D,
            vec![DDayName],
            both(AggFunc::Sum),
            Some(quarter_one),
            asc(&[DDayName]),
            0,
        ),
        7 => (
            QueryGroup::Cube1D,
            vec![RName],
            both(AggFunc::Avg),
            Some(cmp(RName, CmpOp::Eq, str_val("AMERICA"))),
            vec![],
            0,
        ),
        8 => (
            QueryGroup::Cube2D,
            vec![CName, PName],
            both(AggFunc::Sum),
            Some(brand25),
            asc(&[CName, PName]),
            0,
        ),
        9 => (
            QueryGroup::Cube2D,
            vec![NName, PName],
            both(AggFunc::Sum),
            Some(brand25),
            asc(&[NName, PName]),
            0,
        ),
        10 => (
            QueryGroup::Cube2D,
            vec![RName, PName],
            both(AggFunc::Sum),
            Some(brand25),
            asc(&[RName, PName]),
            0,
        ),
        11 => (
            QueryGroup::Cube2D,
            vec![SName, PName],
            both(AggFunc::Max),
            Some(cmp(SAcctBal, CmpOp::Lt, Value::Dec(0))),
            asc(&[SName, PName]),
            0,
        ),
        12 => (QueryGroup::Cube3D, cube3.clone(), both(AggFunc::Sum), None, asc(&cube3), 0),
        13 => (
            QueryGroup::Cube3D,
            cube3.clone(),
            both(AggFunc::Sum),
            Some(Predicate::All(vec![
                cmp(YYearKey, CmpOp::Gt, Value::Int(2000)),
                cmp(CAcctBal, CmpOp::Gt, Value::Dec(500_000)),
            ])),
            asc(&cube3),
            0,
        ),
        14 => (
            QueryGroup::Cube3D,
            cube3.clone(),
            both(AggFunc::Sum),
            Some(Predicate::All(vec![
                cmp(CMktSegment, CmpOp::Eq, str_val("AUTOMOBILE")),
                cmp(YYearKey, CmpOp::Eq, Value::Int(2002)),
            ])),
            asc(&cube3),
            0,
        ),
        15 => (
            QueryGroup::ComplexHierarchy,
            vec![TName],
            both(AggFunc::Avg),
            None,
            asc(&[TName]),
            0,
        ),
        16 => (
            QueryGroup::ComplexHierarchy,
            vec![TName],
            both(AggFunc::Avg),
            Some(brushed),
            asc(&[TName]),
            0,
        ),
        17 => (
            QueryGroup::ComplexHierarchy,
            vec![PName],
            both(AggFunc::Avg),
            Some(brushed),
            asc(&[PName]),
            0,
        ),
        18 => (
            QueryGroup::ComplexHierarchy,
            vec![PName],
            both(AggFunc::Sum),
            Some(big_parts),
            asc(&[PName]),
            0,
        ),
        19 => (
            QueryGroup::ComplexHierarchy,
            vec![TName],
            both(AggFunc::Sum),
            Some(big_parts),
            asc(&[TName]),
            0,
        ),
        20 => (
            QueryGroup::ComplexHierarchy,
            vec![TName],
            both(AggFunc::Sum),
            Some(big_parts),
            asc(&[TName]),
            1,
        ),
        _ => unreachable!("QueryId is validated on construction"),
    };
    QuerySpec { id, group, group_by, aggregations, restriction, ordering, hierarchy_depth: depth }
}

/// All twenty queries in id order.
pub fn all_queries() -> Vec<QuerySpec> {
    QueryId::all().map(query_spec).collect()
}

/// Which blocks run, how many warm runs follow the cold one, and the
/// per-query timeout.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct WorkloadConfig {
    pub reporting: bool,
    pub cube_1d: bool,
    pub cube_2d: bool,
    pub cube_3d: bool,
    pub complex_hierarchy: bool,
    pub nrun: u32,
    pub timeout: Duration,
}

impl Default for WorkloadConfig {
    fn default() -> Self {
        WorkloadConfig {
            reporting: true,
            cube_1d: true,
            cube_2d: true,
            cube_3d: true,
            complex_hierarchy: true,
            nrun: 0,
            timeout: Duration::from_secs(60),
        }
    }
}

impl WorkloadConfig {
    pub fn enabled(&self, g: QueryGroup) -> bool {
        match g {
            QueryGroup::Reporting => self.reporting,
            QueryGroup::Cube1D => self.cube_1d,
            QueryGroup::Cube2D => self.cube_2d,
            QueryGroup::Cube3D => self.cube_3d,
            QueryGroup::ComplexHierarchy => self.complex_hierarchy,
        }
    }

    pub fn validate(&self) -> Result<(), WorkloadError> {
        if self.timeout.is_zero() {
            return Err(WorkloadError::BadConfig("timeout must be positive".into()));
        }
        if !QueryGroup::all().into_iter().any(|g| self.enabled(g)) {
            return Err(WorkloadError::BadConfig("no query group enabled".into()));
        }
        Ok(())
    }
}

/// The queries of all enabled blocks, in id order.
pub fn build_workload(cfg: &WorkloadConfig) -> Result<Vec<QuerySpec>, WorkloadError> {
    cfg.validate()?;
    Ok(all_queries().into_iter().filter(|q| cfg.enabled(q.group)).collect())
}
