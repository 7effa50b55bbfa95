//! Alliance-selection analytics for FIRST Robotics Competition events.
//!
//! The pipeline runs in four stages:
//!
//! 1. [`ingest`] reads qualification matches in The Blue Alliance JSON shape.
//! 2. [`schema`] maps a season's score breakdown onto seven generalized
//!    indicators, and [`stats`] turns alliance-level results into normalized
//!    per-robot profiles.
//! 3. [`predictor`] trains a multi-layer perceptron that predicts match winners
//!    from two alliances' effectiveness vectors.
//! 4. [`optimizer`] scores alliances by radar-polygon area and [`draft`] runs
//!    the serpentine alliance-selection draft with captain promotion.

pub mod draft;
pub mod indicator;
pub mod ingest;
pub mod optimizer;
pub mod predictor;
pub mod schema;
pub mod stats;
pub mod synthetic;

pub use indicator::{Indicator, IndicatorVector, TeamId};
