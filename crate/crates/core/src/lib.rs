//! Hierarchical table model, transformations, recommendations and visualization generation.

pub mod fixture;
pub mod importer;
pub mod locator;
pub mod model;
pub mod structure;
pub mod transform;
pub mod recommend;
pub mod visgen;
pub mod api;
#[cfg(feature = "testing")]
pub mod testing;
