//! Instances, schedules and the segment clock.

pub mod clock;
pub mod graph;
pub mod instance;
pub mod schedule;
pub mod validate;

pub use clock::{Phase, SegmentClock};
pub use graph::{metric_closure, Edge, GraphError, MetricGraph};
pub use instance::{Bipartition, Instance, InstanceIoError, Prepared, Request, ResolvedRequest};
pub use schedule::{
    completions, revenue_profile, validate_schedule, validate_schedule_until, Action, Completion,
    ProfileError, RevenueProfile, Schedule, ScheduleError, ScheduleRule, ScheduleVerdict,
    ScheduleViolation,
};
pub use validate::{validate_instance, ValidationReport, Violation, ViolationCode};
