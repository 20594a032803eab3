//! Dimension member synthesis: a built-in stand-in for an external flat-file
//! generator, following the usual decision-support conventions (25 nations in
//! 5 regions, `Brand#MN` brands, color-word part names, a fixed calendar).

use chrono::{Datelike, NaiveDate};
use rand::Rng;

use super::{param_err, stage_rng, DatagenError, GenParams, GenStage};

pub const NATIONS: [(&str, usize); 25] = [
    ("ALGERIA", 0),
    ("ARGENTINA", 1),
    ("BRAZIL", 1),
    ("CANADA", 1),
    ("EGYPT", 4),
    ("ETHIOPIA", 0),
    ("FRANCE", 3),
    ("GERMANY", 3),
    ("INDIA", 2),
    ("INDONESIA", 2),
    ("IRAN", 4),
    ("IRAQ", 4),
    ("JAPAN", 2),
    ("JORDAN", 4),
    ("KENYA", 0),
    ("MOROCCO", 0),
    ("MOZAMBIQUE", 0),
    ("PERU", 1),
    ("CHINA", 2),
    ("ROMANIA", 3),
    ("SAUDI ARABIA", 4),
    ("VIETNAM", 2),
    ("RUSSIA", 3),
    ("UNITED KINGDOM", 3),
    ("UNITED STATES", 1),
];

pub const REGIONS: [&str; 5] = ["AFRICA", "AMERICA", "ASIA", "EUROPE", "MIDDLE EAST"];

pub const MKTSEGMENTS: [&str; 5] =
    ["AUTOMOBILE", "BUILDING", "FURNITURE", "HOUSEHOLD", "MACHINERY"];

const COLOR_WORDS: [&str; 92] = [
    "almond", "antique", "aquamarine", "azure", "beige", "bisque", "black", "blanched", "blue",
    "blush", "brown", "burlywood", "burnished", "chartreuse", "chiffon", "chocolate", "coral",
    "cornflower", "cornsilk", "cream", "cyan", "dark", "deep", "dim", "dodger", "drab",
    "firebrick", "floral", "forest", "frosted", "gainsboro", "ghost", "goldenrod", "green",
    "grey", "honeydew", "hot", "indian", "ivory", "khaki", "lace", "lavender", "lawn", "lemon",
    "light", "lime", "linen", "magenta", "maroon", "medium", "metallic", "midnight", "mint",
    "misty", "moccasin", "navajo", "navy", "olive", "orange", "orchid", "pale", "papaya",
    "peach", "peru", "pink", "plum", "powder", "puff", "purple", "red", "rose", "rosy", "royal",
    "saddle", "salmon", "sandy", "seashell", "sienna", "sky", "slate", "smoke", "snow", "spring",
    "steel", "tan", "thistle", "tomato", "turquoise", "violet", "wheat", "white", "yellow",
];

/// First and last day of the fixed calendar.
pub const CALENDAR_START: (i32, u32, u32) = (1998, 1, 1);
pub const CALENDAR_END: (i32, u32, u32) = (2004, 12, 31);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Region {
    pub key: i64,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Nation {
    pub key: i64,
    pub name: String,
    /// Index into `DimensionSet::regions`.
    pub region: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Customer {
    pub key: i64,
    pub name: String,
    pub acctbal_cents: i64,
    pub mktsegment: String,
    /// Index into `DimensionSet::nations`.
    pub nation: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Supplier {
    pub key: i64,
    pub name: String,
    pub acctbal_cents: i64,
    pub nation: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Part {
    pub key: i64,
    pub name: String,
    pub brand: String,
    pub retailprice_cents: i64,
    pub size: i64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Day {
    /// yyyymmdd.
    pub key: i64,
    pub dayname: String,
    /// Index into `Calendar::months`.
    pub month: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Month {
    /// Surrogate key yyyymm, unique per calendar month.
    pub key: i64,
    /// Month number 1..12.
    pub monthkey: i64,
    pub monthname: String,
    /// Index into `Calendar::years`.
    pub year: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Year {
    pub key: i64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Calendar {
    pub days: Vec<Day>,
    pub months: Vec<Month>,
    pub years: Vec<Year>,
}

/// All generated dimension members.
#[derive(Debug, Clone, PartialEq)]
pub struct DimensionSet {
    pub regions: Vec<Region>,
    pub nations: Vec<Nation>,
    pub customers: Vec<Customer>,
    pub suppliers: Vec<Supplier>,
    pub parts: Vec<Part>,
    pub calendar: Calendar,
}

impl DimensionSet {
    /// Candidate fact combinations: customers x parts x suppliers x days.
    pub fn candidate_combinations(&self) -> u128 {
        self.customers.len() as u128
            * self.parts.len() as u128
            * self.suppliers.len() as u128
            * self.calendar.days.len() as u128
    }
}

/// Retail price in cents as a fixed function of the part key.
pub fn retail_price_cents(partkey: i64) -> i64 {
    90_000 + (partkey / 10) % 20_001 + 100 * (partkey % 1_000)
}

fn scaled_count(name: &'static str, base: u64, gp: &GenParams) -> Result<u64, DatagenError> {
    let raw = (base as f64 * gp.sf / gp.scale_divisor as f64).ceil();
    if !(raw >= 1.0) {
        return Err(param_err(
            name,
            format!("cardinality {raw} is not positive (sf {} / divisor {})", gp.sf, gp.scale_divisor),
        ));
    }
    if raw > (1u64 << 40) as f64 {
        return Err(param_err(name, format!("cardinality {raw} is unreasonably large")));
    }
    Ok(raw as u64)
}

fn build_calendar() -> Calendar {
    let start = NaiveDate::from_ymd_opt(CALENDAR_START.0, CALENDAR_START.1, CALENDAR_START.2)
        .expect("valid calendar start");
    let end = NaiveDate::from_ymd_opt(CALENDAR_END.0, CALENDAR_END.1, CALENDAR_END.2)
        .expect("valid calendar end");
    let mut cal = Calendar { days: Vec::new(), months: Vec::new(), years: Vec::new() };
    let mut date = start;
    while date <= end {
        let year_key = i64::from(date.year());
        if cal.years.last().map(|y| y.key) != Some(year_key) {
            cal.years.push(Year { key: year_key });
        }
        let month_key = year_key * 100 + i64::from(date.month());
        if cal.months.last().map(|m| m.key) != Some(month_key) {
            cal.months.push(Month {
                key: month_key,
                monthkey: i64::from(date.month()),
                monthname: date.format("%B").to_string(),
                year: cal.years.len() - 1,
            });
        }
        cal.days.push(Day {
            key: month_key * 100 + i64::from(date.day()),
            dayname: date.format("%A").to_string(),
            month: cal.months.len() - 1,
        });
        date = date.succ_opt().expect("calendar range fits chrono");
    }
    cal
}

/// Generates all dimension members as a deterministic function of
/// `(sf, scale_divisor, seed)`.
///
/// Cardinalities: `ceil(200000 * sf / divisor)` parts,
/// `ceil(150000 * sf / divisor)` customers, `ceil(10000 * sf / divisor)`
/// suppliers; nations, regions and the calendar are fixed. Per-member draw
/// order (one dedicated random stream): customers first (nation, account
/// balance, market segment), then suppliers (nation, balance), then parts
/// (two distinct name words, two brand digits, size).
pub fn generate_dimensions(gp: &GenParams) -> Result<DimensionSet, DatagenError> {
    gp.validate()?;
    let n_customers = scaled_count("customers", 150_000, gp)?;
    let n_parts = scaled_count("parts", 200_000, gp)?;
    let n_suppliers = scaled_count("suppliers", 10_000, gp)?;
    let mut rng = stage_rng(gp.seed, GenStage::Dimensions);

    let regions: Vec<Region> = REGIONS
        .iter()
        .enumerate()
        .map(|(i, name)| Region { key: i as i64, name: name.to_string() })
        .collect();
    let nations: Vec<Nation> = NATIONS
        .iter()
        .enumerate()
        .map(|(i, &(name, region))| Nation { key: i as i64, name: name.to_string(), region })
        .collect();

    let customers = (1..=n_customers)
        .map(|key| {
            let nation = rng.random_range(0..NATIONS.len());
            let acctbal_cents = rng.random_range(-99_999..=999_999);
            let mktsegment = MKTSEGMENTS[rng.random_range(0..MKTSEGMENTS.len())].to_string();
            Customer {
                key: key as i64,
                name: format!("Customer#{key:09}"),
                acctbal_cents,
                mktsegment,
                nation,
            }
        })
        .collect();

    let suppliers = (1..=n_suppliers)
        .map(|key| {
            let nation = rng.random_range(0..NATIONS.len());
            let acctbal_cents = rng.random_range(-99_999..=999_999);
            Supplier { key: key as i64, name: format!("Supplier#{key:09}"), acctbal_cents, nation }
        })
        .collect();

    let parts = (1..=n_parts)
        .map(|key| {
            let first = rng.random_range(0..COLOR_WORDS.len());
            let mut second = rng.random_range(0..COLOR_WORDS.len());
            while second == first {
                second = rng.random_range(0..COLOR_WORDS.len());
            }
            let brand_major = rng.random_range(1..=5u8);
            let brand_minor = rng.random_range(1..=5u8);
            let size = rng.random_range(1..=50);
            Part {
                key: key as i64,
                name: format!("{} {}", COLOR_WORDS[first], COLOR_WORDS[second]),
                brand: format!("Brand#{brand_major}{brand_minor}"),
                retailprice_cents: retail_price_cents(key as i64),
                size,
            }
        })
        .collect();

    Ok(DimensionSet { regions, nations, customers, suppliers, parts, calendar: build_calendar() })
}
