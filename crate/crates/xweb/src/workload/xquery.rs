//! Deterministic FLWOR rendering of workload queries.
//!
//! The rendered text targets the document shapes produced by
//! [`crate::codec`]: member values are XML attributes on `<instance>`
//! elements, single parents sit in an `@parent` attribute and additional
//! parents in `<parent ref="..."/>` children, facts carry their slots as
//! child elements. Rendering is purely a function of the query and the
//! model, so the same input always yields byte-identical text.

use std::collections::BTreeSet;

use crate::model::{Attribute, DimKind, WarehouseModel};
use crate::value::{fmt_cents, Value};

use super::{Predicate, QuerySpec, SortDir};

/// Dimension-chain variables a rendered query may bind per fact, in binding
/// order (each entry only refers to earlier ones).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Chain {
    Cust,
    CNat,
    CReg,
    Part,
    Supp,
    Day,
    Month,
    Year,
}

impl Chain {
    fn var(self) -> &'static str {
        match self {
            Chain::Cust => "$cust",
            Chain::CNat => "$cnat",
            Chain::CReg => "$creg",
            Chain::Part => "$part",
            Chain::Supp => "$supp",
            Chain::Day => "$day",
            Chain::Month => "$month",
            Chain::Year => "$year",
        }
    }

    fn level_var(self) -> &'static str {
        match self {
            Chain::Cust => "$custL",
            Chain::CNat => "$cnatL",
            Chain::CReg => "$cregL",
            Chain::Part => "$partL",
            Chain::Supp => "$suppL",
            Chain::Day => "$dayL",
            Chain::Month => "$monthL",
            Chain::Year => "$yearL",
        }
    }

    fn level_id(self) -> &'static str {
        match self {
            Chain::Cust => "Customer",
            Chain::CNat => "C_Nation",
            Chain::CReg => "C_Region",
            Chain::Part => "Part",
            Chain::Supp => "Supplier",
            Chain::Day => "Day",
            Chain::Month => "Month",
            Chain::Year => "Year",
        }
    }

    fn dim(self) -> DimKind {
        match self {
            Chain::Cust | Chain::CNat | Chain::CReg => DimKind::Customer,
            Chain::Part => DimKind::Part,
            Chain::Supp => DimKind::Supplier,
            Chain::Day | Chain::Month | Chain::Year => DimKind::Date,
        }
    }

    fn binding(self) -> String {
        match self {
            Chain::Cust => "let $cust := $custL[@c_custkey = $f/c_custkey]".into(),
            Chain::Part => "let $part := $partL[@p_partkey = $f/p_partkey]".into(),
            Chain::Supp => "let $supp := $suppL[@s_suppkey = $f/s_suppkey]".into(),
            Chain::Day => "let $day := $dayL[@d_datekey = $f/d_datekey]".into(),
            Chain::CNat => "let $cnat := $cnatL[@id = $cust/@parent]".into(),
            Chain::CReg => "let $creg := $cregL[@id = $cnat/@parent]".into(),
            Chain::Month => "let $month := $monthL[@id = $day/@parent]".into(),
            Chain::Year => "let $year := $yearL[@id = $month/@parent]".into(),
        }
    }
}

/// The chain bindings an attribute needs, prerequisites first. Category
/// names ride on the part instance, so `t_name` only needs the part chain.
fn chains_for(a: Attribute) -> &'static [Chain] {
    use Attribute::*;
    match a {
        CCustKey | CName | CAcctBal | CMktSegment => &[Chain::Cust],
        NName => &[Chain::Cust, Chain::CNat],
        RName => &[Chain::Cust, Chain::CNat, Chain::CReg],
        PPartKey | PName | PBrand | PRetailPrice | PSize | TName => &[Chain::Part],
        SSuppKey | SName | SAcctBal => &[Chain::Supp],
        DDateKey | DDayName => &[Chain::Day],
        MMonthKey | MMonthName => &[Chain::Day, Chain::Month],
        YYearKey => &[Chain::Day, Chain::Month, Chain::Year],
        FQuantity | FTotalAmount => &[],
    }
}

enum Typing {
    Int,
    Dec,
    Str,
}

fn typing(a: Attribute) -> Typing {
    use Attribute::*;
    match a {
        CCustKey | PPartKey | PSize | SSuppKey | DDateKey | MMonthKey | YYearKey | FQuantity => {
            Typing::Int
        }
        CAcctBal | PRetailPrice | SAcctBal | FTotalAmount => Typing::Dec,
        _ => Typing::Str,
    }
}

/// Path expression for an attribute: member attributes on the chain
/// variable, measures as fact children.
fn expr_of(a: Attribute) -> String {
    if a.is_measure() {
        return format!("$f/{}", a.name());
    }
    let chain = *chains_for(a).last().expect("dimension attribute has a chain");
    format!("{}/@{}", chain.var(), a.name())
}

fn typed_expr(a: Attribute) -> String {
    let e = expr_of(a);
    match typing(a) {
        Typing::Int => format!("xs:integer({e})"),
        Typing::Dec => format!("xs:decimal({e})"),
        Typing::Str => format!("string({e})"),
    }
}

fn literal(v: &Value) -> String {
    match v {
        Value::Int(n) => n.to_string(),
        Value::Dec(cents) => fmt_cents(*cents),
        Value::Str(s) => format!("\"{}\"", s.replace('"', "\"\"")),
    }
}

fn flatten<'p>(p: &'p Predicate, out: &mut Vec<&'p Predicate>) {
    match p {
        Predicate::All(ps) => ps.iter().for_each(|c| flatten(c, out)),
        leaf => out.push(leaf),
    }
}

const CAT_REFS: &str = "($part/@parent, $part/parent/@ref)";

struct Renderer<'a> {
    q: &'a QuerySpec,
    chains: Vec<Chain>,
    /// Fact-level conditions, rendered, in definition order.
    conds: Vec<String>,
    /// Conditions on a single category ref `$t` (only when `t_name` is a
    /// grouping key).
    tpair_conds: Vec<String>,
    tops: bool,
}

impl<'a> Renderer<'a> {
    fn new(q: &'a QuerySpec) -> Self {
        let t_grouped = q.group_by.contains(&Attribute::TName);
        let mut chain_set = BTreeSet::new();
        let note = |a: Attribute, set: &mut BTreeSet<Chain>| {
            set.extend(chains_for(a).iter().copied());
        };
        for &a in &q.group_by {
            note(a, &mut chain_set);
        }
        for &(a, _) in &q.ordering {
            note(a, &mut chain_set);
        }

        let mut conds = Vec::new();
        let mut tpair_conds = Vec::new();
        let mut leaves = Vec::new();
        if let Some(r) = &q.restriction {
            flatten(r, &mut leaves);
        }
        for leaf in leaves {
            match leaf {
                Predicate::Cmp { attr, op, value } if *attr == Attribute::TName => {
                    note(*attr, &mut chain_set);
                    let cond = format!("string($t) {} {}", op.symbol(), literal(value));
                    if t_grouped {
                        tpair_conds.push(cond);
                    } else {
                        conds.push(format!("some $t in {CAT_REFS} satisfies {cond}"));
                    }
                }
                Predicate::Cmp { attr, op, value } => {
                    note(*attr, &mut chain_set);
                    conds.push(format!("{} {} {}", typed_expr(*attr), op.symbol(), literal(value)));
                }
                Predicate::QuarterEq { attr, quarter } => {
                    note(*attr, &mut chain_set);
                    conds.push(format!("ceiling({} div 3) = {quarter}", typed_expr(*attr)));
                }
                Predicate::All(_) => unreachable!("flattened"),
            }
        }
        let chains: Vec<Chain> = chain_set.into_iter().collect();
        let exists: Vec<String> =
            chains.iter().map(|c| format!("exists({})", c.var())).collect();
        let mut all_conds = exists;
        all_conds.extend(conds);
        Renderer {
            q,
            chains,
            conds: all_conds,
            tpair_conds,
            tops: q.hierarchy_depth > 0 && t_grouped,
        }
    }

    /// The per-fact sequence of category keys: raw refs, optionally filtered
    /// by pair conditions, optionally rolled to the hierarchy top.
    fn cat_seq(&self, filtered: bool) -> String {
        let ret = if self.tops { "local:tops($catL, string($t))" } else { "string($t)" };
        let mut s = format!("for $t in {CAT_REFS}");
        if filtered && !self.tpair_conds.is_empty() {
            s.push_str(&format!(" where {}", self.tpair_conds.join(" and ")));
        }
        s.push_str(&format!(" return {ret}"));
        s
    }

    /// A `for $f in $facts ... return <expr>` loop over qualifying facts.
    fn fact_loop(&self, pad: &str, extra: &[String], ret: &str) -> String {
        let mut lines = vec!["for $f in $facts".to_string()];
        for c in &self.chains {
            lines.push(c.binding());
        }
        let conds: Vec<&str> =
            self.conds.iter().chain(extra.iter()).map(String::as_str).collect();
        if !conds.is_empty() {
            lines.push(format!("where {}", conds.join(" and ")));
        }
        lines.push(format!("return {ret}"));
        lines.join(&format!("\n{pad}"))
    }

    /// Collection expression and membership condition for grouping key `i`.
    fn key_parts(&self, i: usize) -> (String, String) {
        let a = self.q.group_by[i];
        if a == Attribute::TName {
            (format!("({})", self.cat_seq(true)), format!("$k{i} = ({})", self.cat_seq(false)))
        } else {
            let e = typed_expr(a);
            (e.clone(), format!("{e} = $k{i}"))
        }
    }

    fn aggregate_cells(&self, memberships: &[String], pad: &str) -> String {
        let mut cells = String::new();
        for agg in &self.q.aggregations {
            let col = agg.column_name();
            let body = self.fact_loop(&format!("{pad}  "), memberships, &typed_expr(agg.measure.attribute()));
            cells.push_str(&format!(
                "{pad}<{col}>{{{}(\n{pad}  {body})}}</{col}>\n",
                agg.func.prefix()
            ));
        }
        cells
    }

    fn render(&self, model: &WarehouseModel) -> String {
        let mut out = format!("(: {} :)\n", self.q.id);
        if self.tops {
            out.push_str(concat!(
                "declare function local:tops($cats as element()*, $name as xs:string) as xs:string* {\n",
                "  let $c := $cats[@id = $name]\n",
                "  let $up := for $p in ($c/@parent, $c/parent/@ref) return string($p)\n",
                "  return if (empty($up)) then $name\n",
                "    else distinct-values(for $p in $up return local:tops($cats, $p))\n",
                "};\n",
            ));
        }
        out.push_str(&format!("let $facts := doc(\"{}\")/facts/fact\n", model.fact.path));
        let dim_path = |k: DimKind| {
            model
                .dimension(k.dimension_id())
                .map(|d| d.path.as_str())
                .expect("supported model declares all four dimensions")
        };
        for c in &self.chains {
            out.push_str(&format!(
                "let {} := doc(\"{}\")/dimension/Level[@id = \"{}\"]/instance\n",
                c.level_var(),
                dim_path(c.dim()),
                c.level_id()
            ));
        }
        if self.tops {
            out.push_str(&format!(
                "let $catL := doc(\"{}\")/dimension/Level[@id = \"Category\"]/instance\n",
                dim_path(DimKind::Part)
            ));
        }
        out.push_str("return\n");

        if self.q.group_by.is_empty() {
            out.push_str("<result>\n  <row>\n");
            out.push_str(&self.aggregate_cells(&[], "    "));
            out.push_str("  </row>\n</result>\n");
            return out;
        }

        out.push_str("<result>{\n");
        let mut memberships: Vec<String> = Vec::new();
        for i in 0..self.q.group_by.len() {
            let (collect, membership) = self.key_parts(i);
            let body = self.fact_loop("    ", &memberships, &collect);
            out.push_str(&format!("  for $k{i} in distinct-values(\n    {body})\n"));
            memberships.push(membership);
        }

        let mut order_cols = Vec::new();
        let mut ord_count = 0;
        for (a, dir) in &self.q.ordering {
            let var = match self.q.group_by.iter().position(|g| g == a) {
                Some(i) => format!("$k{i}"),
                None => {
                    let var = format!("$ord{ord_count}");
                    ord_count += 1;
                    let body = self.fact_loop("    ", &memberships, &typed_expr(*a));
                    out.push_str(&format!("  let {var} := min(\n    {body})\n"));
                    var
                }
            };
            let word = match dir {
                SortDir::Asc => "ascending",
                SortDir::Desc => "descending",
            };
            order_cols.push(format!("{var} {word}"));
        }
        if !order_cols.is_empty() {
            out.push_str(&format!("  order by {}\n", order_cols.join(", ")));
        }

        out.push_str("  return\n  <row>\n");
        for (i, a) in self.q.group_by.iter().enumerate() {
            let name = a.name();
            out.push_str(&format!("    <{name}>{{$k{i}}}</{name}>\n"));
        }
        out.push_str(&self.aggregate_cells(&memberships, "    "));
        out.push_str("  </row>\n}</result>\n");
        out
    }
}

/// Render one workload query as FLWOR text against the documents a model
/// describes.
pub fn render_xquery(q: &QuerySpec, model: &WarehouseModel) -> String {
    Renderer::new(q).render(model)
}
