//! Classifies OpenStreetMap building footprints as residential or
//! non-residential from their own tags and the tags of the features they
//! intersect.

pub mod classifier;
pub mod geometry;
pub mod osm;
pub mod pipeline;
pub mod rules;
pub mod stats;
pub mod validation;

pub use classifier::{classify_collection, classify_one, BuildingClass, ClassifiedFootprint, Stage};
pub use osm::{Feature, FeatureCollection, FeatureId, TagMap};
pub use rules::{default_rules, load_rules, RuleSet};
