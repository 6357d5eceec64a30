pub mod bench;
pub mod http;
pub mod ldp;
pub mod query;
pub mod rdf;
pub mod modelgen;
pub mod petri;
pub mod rules;
pub mod runtime;
pub mod semantics;
pub mod trace;
pub mod vocab;
