pub mod analysis;
pub mod awcet;
pub mod cfg;
pub mod cft;
pub mod corpus;
pub mod oracle;
pub mod restructure;
pub mod symbolic;
pub mod weight;

pub use weight::Weight;

/// Machine cycles.
pub type Cycles = u64;
pub type Seq = awcet::WcetSeq<Cycles>;
pub type Awcet = awcet::AbstractWcet<Cycles>;
pub type WcetFormula = symbolic::Formula<Cycles>;
