//! Chronological networks ("chronnets") from spatiotemporal event data.
//!
//! The pipeline: discretize space into grid cells, slide over the
//! time-ordered event sequence linking the cells of consecutive events, and
//! analyze the resulting weighted graph. Strong links mark recurrent
//! consecutive activity; communities mark regions active in the same period;
//! degree and strength outliers mark cells with uncommonly long or frequent
//! activity.
//!
//! ```
//! use chronnet::{build, BBox, Event, EventSet, GridSpec};
//!
//! let grid = GridSpec::rect(BBox::new(0.0, 2.0, 0.0, 2.0), 2, 2)?;
//! let events = EventSet::new(vec![
//!     Event::new(1.0, 0.5, 0.5), // cell 0
//!     Event::new(2.0, 1.5, 0.5), // cell 1
//!     Event::new(3.0, 0.5, 0.5), // cell 0 again
//! ]);
//! let net = build(&events, &grid, 1, None)?.undirect()?;
//! assert_eq!(net.weight(chronnet::CellId(0), chronnet::CellId(1)), 2);
//! # Ok::<(), chronnet::Error>(())
//! ```
//!
//! Modules follow the pipeline stages:
//! - [`events`]: event model, ordering, CSV ingestion (incl. MODIS MCD14ML)
//! - [`grid`]: rectangular and hexagonal spatial binning
//! - [`datagen`], [`ode`], [`scenarios`]: bundled artificial data sources
//! - [`network`]: chronnet construction, pruning, projection, snapshots
//! - [`measures`]: degrees, strengths, paths, transitivity, centralities
//! - [`fit`]: power-law and log-normal tail fitting
//! - [`mining`]: communities, event clustering, correction, change points,
//!   outliers
//! - [`pipeline`]: reproducible experiment runs behind the CLI

pub mod datagen;
pub mod error;
pub mod events;
pub mod fit;
pub mod grid;
pub mod measures;
pub mod mining;
pub mod network;
pub mod ode;
pub mod pipeline;
pub mod scenarios;

pub use error::{Error, Result};
pub use events::{Event, EventSet};
pub use grid::{BBox, CellId, GridSpec};
pub use network::{build, build_parallel, build_snapshots, Chronnet};
