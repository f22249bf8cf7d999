pub mod config;
pub mod decor;
pub mod geometry;
pub mod grammar;
pub mod lofd;
pub mod metrics;
pub mod model;
pub mod navigation;
pub mod pipeline;
pub mod raster;
pub mod segmentation;
pub mod synth;
