pub mod dataload;
pub mod dataset;
pub mod graph;
pub mod linker;
pub mod lossless;
pub mod owl;
pub mod rdf;
pub mod search;
pub mod vocab;
