//! The sale fact record.
//!
//! A fact carries four dimension references and two measures. Any slot may be
//! missing (dirty data), and the order in which present slots appear in the
//! fact document is itself data: the generator may shuffle it per fact, and
//! the codec must reproduce it byte for byte.

use crate::value::Value;

/// One of the six fact slots, in canonical document order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Slot {
    CustKey,
    PartKey,
    SuppKey,
    DateKey,
    Quantity,
    TotalAmount,
}

impl Slot {
    pub const ALL: [Slot; 6] = [
        Slot::CustKey,
        Slot::PartKey,
        Slot::SuppKey,
        Slot::DateKey,
        Slot::Quantity,
        Slot::TotalAmount,
    ];

    /// Element name of the slot inside a `<fact>` element.
    pub fn element_name(self) -> &'static str {
        match self {
            Slot::CustKey => "c_custkey",
            Slot::PartKey => "p_partkey",
            Slot::SuppKey => "s_suppkey",
            Slot::DateKey => "d_datekey",
            Slot::Quantity => "f_quantity",
            Slot::TotalAmount => "f_totalamount",
        }
    }

    pub fn from_element(name: &str) -> Option<Slot> {
        Slot::ALL.into_iter().find(|s| s.element_name() == name)
    }
}

/// A single fact. Measures: quantity (integer) and total amount (cents).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fact {
    pub custkey: Option<i64>,
    pub partkey: Option<i64>,
    pub suppkey: Option<i64>,
    pub datekey: Option<i64>,
    pub quantity: Option<i64>,
    pub total_cents: Option<i64>,
    /// Order in which present slots are emitted.
    pub slot_order: [Slot; 6],
}

impl Fact {
    pub fn new(
        custkey: Option<i64>,
        partkey: Option<i64>,
        suppkey: Option<i64>,
        datekey: Option<i64>,
        quantity: Option<i64>,
        total_cents: Option<i64>,
    ) -> Self {
        Fact { custkey, partkey, suppkey, datekey, quantity, total_cents, slot_order: Slot::ALL }
    }

    /// A fact with every slot missing, in canonical slot order.
    pub fn empty() -> Self {
        Fact::new(None, None, None, None, None, None)
    }

    /// Raw slot content, `None` when missing.
    pub fn get(&self, slot: Slot) -> Option<i64> {
        match slot {
            Slot::CustKey => self.custkey,
            Slot::PartKey => self.partkey,
            Slot::SuppKey => self.suppkey,
            Slot::DateKey => self.datekey,
            Slot::Quantity => self.quantity,
            Slot::TotalAmount => self.total_cents,
        }
    }

    pub fn set(&mut self, slot: Slot, v: Option<i64>) {
        match slot {
            Slot::CustKey => self.custkey = v,
            Slot::PartKey => self.partkey = v,
            Slot::SuppKey => self.suppkey = v,
            Slot::DateKey => self.datekey = v,
            Slot::Quantity => self.quantity = v,
            Slot::TotalAmount => self.total_cents = v,
        }
    }

    /// Typed slot content: keys and quantity are integers, the total amount
    /// is a decimal.
    pub fn value(&self, slot: Slot) -> Option<Value> {
        self.get(slot).map(|v| match slot {
            Slot::TotalAmount => Value::Dec(v),
            _ => Value::Int(v),
        })
    }

    pub fn present(&self, slot: Slot) -> bool {
        self.get(slot).is_some()
    }

    pub fn present_count(&self) -> usize {
        Slot::ALL.into_iter().filter(|&s| self.present(s)).count()
    }

    /// True when both facts carry the same slot contents, regardless of the
    /// order slots would be emitted in.
    pub fn logical_eq(&self, other: &Fact) -> bool {
        Slot::ALL.into_iter().all(|s| self.get(s) == other.get(s))
    }
}
