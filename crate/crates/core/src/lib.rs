pub mod borel;
pub mod cantor;
pub mod decorate;
pub mod cli;
pub mod corpus;
pub mod dsl;
pub mod dyadic;
pub mod exec;
pub mod gdelta;
pub mod l1;
pub mod measure;
pub mod sampler;
