pub mod coboundary;
pub mod cocycle;
pub mod error;
pub mod experiment;
pub mod group;
pub mod rep;
pub mod ring;
pub mod sector;
pub mod snf;
pub mod spectral;
pub mod word;
