//! Shared fixtures for the engine benchmarks.

use advs_core::{preset, CouplingConfig, GroverInstance, PhaseIntegral, Preset, PresetParams, Schedule, ScheduleKind, SpectralModel, Target, Topology};

pub struct Fixture {
    pub instance: GroverInstance,
    pub schedule: Schedule,
    pub phase: PhaseIntegral,
    pub coupling: CouplingConfig,
    pub model: SpectralModel,
}

impl Fixture {
    /// Balanced instance on n qubits, epsilon = 0.1, effective coupling 0.01.
    pub fn new(n: u32, kind: ScheduleKind, bath: Preset) -> Fixture {
        let instance = GroverInstance::balanced(n).expect("valid qubit count");
        let schedule = Schedule::build(kind, &instance, Target::Epsilon(0.1)).expect("schedule builds");
        let phase = PhaseIntegral::new(&schedule).expect("phase integral");
        Fixture {
            instance,
            schedule,
            phase,
            coupling: CouplingConfig::new(0.01, Topology::Effective),
            model: preset(bath, PresetParams::default()).expect("preset"),
        }
    }

    pub fn photon(n: u32) -> Fixture {
        Fixture::new(n, ScheduleKind::GapSquared, Preset::PhotonThermal(3))
    }
}
