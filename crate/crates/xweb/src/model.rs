//! Warehouse metadata: the snowflake schema described by the model document.
//!
//! A model names one fact schema and a set of dimensions; each dimension is a
//! list of levels wired together by rollup/drilldown references. The default
//! model ships the sale warehouse used everywhere else in the crate, but the
//! codec and validation work for any model expressible in the format.

use std::collections::BTreeSet;

/// One hierarchy level of a dimension.
///
/// Rollup and drilldown are both lists: most levels use a single target (or
/// none), but a complex hierarchy needs several — the category level names
/// itself as a rollup target and both itself and the part level as drilldown
/// targets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelDef {
    pub id: String,
    /// Coarser levels this one rolls up to.
    pub rollup: Vec<String>,
    /// Finer levels that drill down from this one.
    pub drilldown: Vec<String>,
}

impl LevelDef {
    pub fn new(id: &str, rollup: &[&str], drilldown: &[&str]) -> Self {
        LevelDef {
            id: id.to_string(),
            rollup: rollup.iter().map(|s| s.to_string()).collect(),
            drilldown: drilldown.iter().map(|s| s.to_string()).collect(),
        }
    }
}

/// A dimension: ordered levels, finest first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DimensionDef {
    pub id: String,
    /// Document the dimension instance data lives in.
    pub path: String,
    pub levels: Vec<LevelDef>,
}

impl DimensionDef {
    /// The finest level, i.e. the one fact references resolve against.
    pub fn finest_level(&self) -> &LevelDef {
        &self.levels[0]
    }

    pub fn level(&self, id: &str) -> Option<&LevelDef> {
        self.levels.iter().find(|l| l.id == id)
    }
}

/// A reference from the fact schema to one dimension.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DimRef {
    /// Dimension id the reference points at.
    pub dimension: String,
    /// Fact attribute holding the member key, e.g. `d_datekey`.
    pub attribute: String,
}

/// The fact schema: measures plus one reference per dimension.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactDef {
    pub id: String,
    /// Document the fact stream lives in.
    pub path: String,
    pub measures: Vec<String>,
    pub dimrefs: Vec<DimRef>,
}

/// A complete warehouse model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WarehouseModel {
    pub fact: FactDef,
    pub dimensions: Vec<DimensionDef>,
}

impl WarehouseModel {
    pub fn dimension(&self, id: &str) -> Option<&DimensionDef> {
        self.dimensions.iter().find(|d| d.id == id)
    }

    pub fn level_count(&self) -> usize {
        self.dimensions.iter().map(|d| d.levels.len()).sum()
    }

    /// Document names this model expects, fact document last.
    pub fn document_paths(&self) -> Vec<&str> {
        let mut v: Vec<&str> = self.dimensions.iter().map(|d| d.path.as_str()).collect();
        v.push(self.fact.path.as_str());
        v
    }
}

/// Dimension ids of the default model.
pub const DIM_DATE: &str = "Date";
pub const DIM_PART: &str = "PartDim";
pub const DIM_CUSTOMER: &str = "CustomerDim";
pub const DIM_SUPPLIER: &str = "SupplierDim";

/// Builds the sale warehouse model: a sale fact with quantity and total
/// amount, and date, part, customer and supplier dimensions (eleven levels in
/// total). The part dimension carries the self-referencing category level.
pub fn build_default_model() -> WarehouseModel {
    WarehouseModel {
        fact: FactDef {
            id: "Sale".to_string(),
            path: "f_sale.xml".to_string(),
            measures: vec!["Quantity".to_string(), "TotalAmount".to_string()],
            dimrefs: vec![
                DimRef { dimension: DIM_CUSTOMER.into(), attribute: "c_custkey".into() },
                DimRef { dimension: DIM_PART.into(), attribute: "p_partkey".into() },
                DimRef { dimension: DIM_SUPPLIER.into(), attribute: "s_suppkey".into() },
                DimRef { dimension: DIM_DATE.into(), attribute: "d_datekey".into() },
            ],
        },
        dimensions: vec![
            DimensionDef {
                id: DIM_DATE.into(),
                path: "d_date.xml".into(),
                levels: vec![
                    LevelDef::new("Day", &["Month"], &[]),
                    LevelDef::new("Month", &["Year"], &["Day"]),
                    LevelDef::new("Year", &[], &["Month"]),
                ],
            },
            DimensionDef {
                id: DIM_PART.into(),
                path: "d_part.xml".into(),
                levels: vec![
                    LevelDef::new("Part", &["Category"], &[]),
                    LevelDef::new("Category", &["Category"], &["Part", "Category"]),
                ],
            },
            DimensionDef {
                id: DIM_CUSTOMER.into(),
                path: "d_customer.xml".into(),
                levels: vec![
                    LevelDef::new("Customer", &["C_Nation"], &[]),
                    LevelDef::new("C_Nation", &["C_Region"], &["Customer"]),
                    LevelDef::new("C_Region", &[], &["C_Nation"]),
                ],
            },
            DimensionDef {
                id: DIM_SUPPLIER.into(),
                path: "d_supplier.xml".into(),
                levels: vec![
                    LevelDef::new("Supplier", &["S_Nation"], &[]),
                    LevelDef::new("S_Nation", &["S_Region"], &["Supplier"]),
                    LevelDef::new("S_Region", &[], &["S_Nation"]),
                ],
            },
        ],
    }
}

/// Checks structural consistency of a model and returns one diagnostic per
/// problem found (empty means valid).
///
/// Rules: ids and document paths are unique and non-empty; every
/// rollup/drilldown reference names a level of the same dimension; the
/// drilldown set of a level is exactly the set of levels that roll up to it;
/// the fact has at least one measure and references existing dimensions.
pub fn validate_model(model: &WarehouseModel) -> Vec<String> {
    let mut bad = Vec::new();
    let mut paths = BTreeSet::new();
    let mut dim_ids = BTreeSet::new();

    for d in &model.dimensions {
        if d.id.is_empty() {
            bad.push("dimension with empty id".to_string());
        }
        if !dim_ids.insert(d.id.clone()) {
            bad.push(format!("duplicate dimension id {:?}", d.id));
        }
        if !d.path.ends_with(".xml") {
            bad.push(format!("dimension {:?} path {:?} does not end in .xml", d.id, d.path));
        }
        if !paths.insert(d.path.clone()) {
            bad.push(format!("duplicate document path {:?}", d.path));
        }
        if d.levels.is_empty() {
            bad.push(format!("dimension {:?} has no levels", d.id));
            continue;
        }
        let mut level_ids = BTreeSet::new();
        for l in &d.levels {
            if !level_ids.insert(l.id.clone()) {
                bad.push(format!("dimension {:?}: duplicate level id {:?}", d.id, l.id));
            }
        }
        for l in &d.levels {
            if l.id.is_empty() {
                bad.push(format!("dimension {:?} has a level with an empty id", d.id));
            }
            for r in &l.rollup {
                if !level_ids.contains(r) {
                    bad.push(format!(
                        "dimension {:?}: level {:?} rolls up to unknown level {:?}",
                        d.id, l.id, r
                    ));
                }
            }
            for t in &l.drilldown {
                if !level_ids.contains(t) {
                    bad.push(format!(
                        "dimension {:?}: level {:?} drills down to unknown level {:?}",
                        d.id, l.id, t
                    ));
                }
            }
            // b in a.drilldown <=> a in b.rollup, checked from b's side.
            let expect: BTreeSet<&str> = d
                .levels
                .iter()
                .filter(|a| a.rollup.iter().any(|r| r == &l.id))
                .map(|a| a.id.as_str())
                .collect();
            let got: BTreeSet<&str> = l.drilldown.iter().map(String::as_str).collect();
            if expect != got {
                bad.push(format!(
                    "dimension {:?}: level {:?} drilldown {:?} does not mirror rollups {:?}",
                    d.id, l.id, got, expect
                ));
            }
        }
    }

    if model.fact.id.is_empty() {
        bad.push("fact with empty id".to_string());
    }
    if model.fact.path.is_empty() {
        bad.push("fact has an empty document path".to_string());
    } else if !paths.insert(model.fact.path.clone()) {
        bad.push(format!("duplicate document path {:?}", model.fact.path));
    }
    if model.fact.measures.is_empty() {
        bad.push("fact declares no measures".to_string());
    }
    let mut measure_ids = BTreeSet::new();
    for m in &model.fact.measures {
        if !measure_ids.insert(m.clone()) {
            bad.push(format!("duplicate measure {m:?}"));
        }
    }
    let mut ref_dims = BTreeSet::new();
    for r in &model.fact.dimrefs {
        if !dim_ids.contains(&r.dimension) {
            bad.push(format!("fact references unknown dimension {:?}", r.dimension));
        }
        if !ref_dims.insert(r.dimension.clone()) {
            bad.push(format!("fact references dimension {:?} twice", r.dimension));
        }
        if r.attribute.is_empty() {
            bad.push(format!("fact reference to {:?} has an empty attribute", r.dimension));
        }
    }

    bad
}

/// Which dimension an attribute resolves through.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DimKind {
    Date,
    Part,
    Customer,
    Supplier,
}

impl DimKind {
    pub fn dimension_id(self) -> &'static str {
        match self {
            DimKind::Date => DIM_DATE,
            DimKind::Part => DIM_PART,
            DimKind::Customer => DIM_CUSTOMER,
            DimKind::Supplier => DIM_SUPPLIER,
        }
    }
}

/// The attribute vocabulary of the default model: every member attribute a
/// query may group, restrict or order by, plus the two measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Attribute {
    CCustKey,
    CName,
    CAcctBal,
    CMktSegment,
    NName,
    PPartKey,
    PName,
    PBrand,
    PRetailPrice,
    PSize,
    TName,
    SSuppKey,
    SName,
    SAcctBal,
    RName,
    DDateKey,
    DDayName,
    MMonthKey,
    MMonthName,
    YYearKey,
    FQuantity,
    FTotalAmount,
}

impl Attribute {
    pub fn parse(name: &str) -> Option<Attribute> {
        use Attribute::*;
        Some(match name {
            "c_custkey" => CCustKey,
            "c_name" => CName,
            "c_acctbal" => CAcctBal,
            "c_mktsegment" => CMktSegment,
            "n_name" => NName,
            "p_partkey" => PPartKey,
            "p_name" => PName,
            "p_brand" => PBrand,
            "p_retailprice" => PRetailPrice,
            "p_size" => PSize,
            "t_name" => TName,
            "s_suppkey" => SSuppKey,
            "s_name" => SName,
            "s_acctbal" => SAcctBal,
            "r_name" => RName,
            "d_datekey" => DDateKey,
            "d_dayname" => DDayName,
            "m_monthkey" => MMonthKey,
            "m_monthname" => MMonthName,
            "y_yearkey" => YYearKey,
            "f_quantity" => FQuantity,
            "f_totalamount" => FTotalAmount,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        use Attribute::*;
        match self {
            CCustKey => "c_custkey",
            CName => "c_name",
            CAcctBal => "c_acctbal",
            CMktSegment => "c_mktsegment",
            NName => "n_name",
            PPartKey => "p_partkey",
            PName => "p_name",
            PBrand => "p_brand",
            PRetailPrice => "p_retailprice",
            PSize => "p_size",
            TName => "t_name",
            SSuppKey => "s_suppkey",
            SName => "s_name",
            SAcctBal => "s_acctbal",
            RName => "r_name",
            DDateKey => "d_datekey",
            DDayName => "d_dayname",
            MMonthKey => "m_monthkey",
            MMonthName => "m_monthname",
            YYearKey => "y_yearkey",
            FQuantity => "f_quantity",
            FTotalAmount => "f_totalamount",
        }
    }

    /// The dimension a fact must successfully reference for this attribute to
    /// be defined; `None` for measures.
    pub fn dimension(self) -> Option<DimKind> {
        use Attribute::*;
        match self {
            CCustKey | CName | CAcctBal | CMktSegment | NName | RName => Some(DimKind::Customer),
            PPartKey | PName | PBrand | PRetailPrice | PSize | TName => Some(DimKind::Part),
            SSuppKey | SName | SAcctBal => Some(DimKind::Supplier),
            DDateKey | DDayName | MMonthKey | MMonthName | YYearKey => Some(DimKind::Date),
            FQuantity | FTotalAmount => None,
        }
    }

    pub fn is_measure(self) -> bool {
        matches!(self, Attribute::FQuantity | Attribute::FTotalAmount)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_model_is_valid_and_has_eleven_levels() {
        let m = build_default_model();
        assert_eq!(validate_model(&m), Vec::<String>::new());
        assert_eq!(m.level_count(), 11);
        assert_eq!(m.dimensions.len(), 4);
        assert_eq!(m.fact.measures, vec!["Quantity", "TotalAmount"]);
        assert_eq!(m.fact.dimrefs.len(), 4);
        assert_eq!(
            m.document_paths(),
            vec!["d_date.xml", "d_part.xml", "d_customer.xml", "d_supplier.xml", "f_sale.xml"]
        );
        let day = m.dimension(DIM_DATE).unwrap().level("Day").unwrap();
        assert_eq!(day.rollup, vec!["Month"]);
        assert!(day.drilldown.is_empty());
    }

    #[test]
    fn category_level_references_itself() {
        let m = build_default_model();
        let part = m.dimension(DIM_PART).unwrap();
        let cat = part.level("Category").unwrap();
        assert_eq!(cat.rollup, vec!["Category"]);
        assert_eq!(cat.drilldown, vec!["Part", "Category"]);
        assert_eq!(part.finest_level().id, "Part");
    }

    #[test]
    fn validation_flags_broken_references() {
        let mut m = build_default_model();
        m.dimensions[0].levels[0].rollup = vec!["Quarter".to_string()];
        let bad = validate_model(&m);
        assert!(bad.iter().any(|d| d.contains("Quarter")), "{bad:?}");

        let mut m = build_default_model();
        m.dimensions[1].path = m.dimensions[0].path.clone();
        assert!(validate_model(&m).iter().any(|d| d.contains("duplicate document path")));

        let mut m = build_default_model();
        m.fact.measures.clear();
        assert!(validate_model(&m).iter().any(|d| d.contains("no measures")));

        let mut m = build_default_model();
        m.dimensions[2].levels[1].drilldown.clear();
        assert!(validate_model(&m).iter().any(|d| d.contains("does not mirror")));

        let mut m = build_default_model();
        m.dimensions[3].path = "d_supplier.txt".to_string();
        assert!(validate_model(&m).iter().any(|d| d.contains("does not end in .xml")));
    }

    #[test]
    fn attribute_vocabulary_round_trips() {
        use Attribute::*;
        let all = [
            CCustKey, CName, CAcctBal, CMktSegment, NName, PPartKey, PName, PBrand, PRetailPrice,
            PSize, TName, SSuppKey, SName, SAcctBal, RName, DDateKey, DDayName, MMonthKey,
            MMonthName, YYearKey, FQuantity, FTotalAmount,
        ];
        for a in all {
            assert_eq!(Attribute::parse(a.name()), Some(a));
        }
        assert_eq!(Attribute::parse("o_orderkey"), None);
        assert_eq!(TName.dimension(), Some(DimKind::Part));
        assert_eq!(RName.dimension(), Some(DimKind::Customer));
        assert_eq!(FQuantity.dimension(), None);
        assert!(FTotalAmount.is_measure());
    }
}
