//! Loading, validation and cleaning of the input layers, demand-point
//! extraction and LGA assignment.

mod assign;
pub(crate) mod layers;
mod records;
mod trips;

pub use assign::{assign_lga, locate_in_lgas, LgaAssignment};
pub use layers::{
    load_fire_grid, load_lgas, load_output_features, load_pois, load_routes, load_stations, write_fire_grid,
    write_lgas, write_pois, write_routes, write_stations,
};
pub use records::{
    DemandKind, DemandPoint, FireRiskGrid, LgaRecord, PoiCategory, PoiRecord, RouteRecord, StationKind, StationRecord,
    TripFix, TripRecord, ALTITUDE_RANGE_M,
};
pub use trips::{
    clean_trips, detect_stays, extract_demand_points, load_trips, write_trips_csv, CleaningSummary, LoadSummary,
    MalformedRow, TripFormat, TRIPS_CSV_HEADER,
};
