#![allow(clippy::needless_range_loop)]

pub mod algebroid;
pub mod charclass;
pub mod courant;
pub mod fiber;
pub mod fixtures;
pub mod geometry;
pub mod linalg;
pub mod morphism;
pub mod report;
pub mod sample;
pub mod scalar;
