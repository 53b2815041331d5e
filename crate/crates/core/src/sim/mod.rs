//! Time-domain verification on an averaged converter model.

pub mod analysis;
pub mod model;
pub mod relay;
pub mod scenario;
pub mod ssrdc;
pub mod suite;

pub use relay::{Relay, RelayConfig};
pub use scenario::{simulate, Event, EventKind, KssoSource, Scenario, SimOutput, CSV_HEADER};
pub use ssrdc::SsrdcRuntime;
pub use suite::{builtin_scenarios, judge, run_pair, run_scenario_suite, Builtin, Outcome, RunVerdict, ScenarioReport};
