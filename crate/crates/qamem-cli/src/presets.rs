//! Shipped configs behind `run <name>` and `list-presets`.

pub struct Preset {
    pub name: &'static str,
    pub description: &'static str,
    pub toml: &'static str,
}

pub const PRESETS: &[Preset] = &[
    Preset {
        name: "walk-fig4",
        description: "three-qubit dissipative walk storing {011, 111}; \
                      retrieval curve from |000> at eta/gamma = 0.1, kappa = 0",
        toml: r#"
[model.walk]
n_qubits = 3
patterns = ["011", "111"]
gamma = 1.0
eta = 0.1
kappa = 0.0

[experiment.retrieve]
initial = "000"
t_final = 50.0
n_times = 201
"#,
    },
    Preset {
        name: "resonator-fig5-weak",
        description: "three-lobe resonator, weak symmetry (gamma1 = 1); \
                      classify 100 noisy coherent inputs at delta = 0.5",
        toml: r#"
seed = 11

[model.resonator]
n = 3
delta = 0.4
eta = 1.56
theta0 = 0.0
gamma1 = 1.0
gamma_n = 0.2
fock_dim = 40

[experiment.classify]
n_inputs = 100
delta = 0.5
"#,
    },
    Preset {
        name: "resonator-fig5-strong",
        description: "three-lobe resonator, strong symmetry (gamma1 = 0); \
                      cat trajectory with a reset-to-vacuum error",
        toml: r#"
seed = 11

[model.resonator]
n = 3
delta = 0.4
eta = 1.56
theta0 = 0.0
gamma1 = 0.0
gamma_n = 0.2
fock_dim = 40

[experiment.trajectory]
t_reset = 6.0
t_final = 16.0
n_snapshots = 400
"#,
    },
    Preset {
        name: "gus-sec7c",
        description: "cyclic three-pattern family on 3 qubits; exact \
                      capacities and the square-root-measurement readout",
        toml: r#"
[model.gus]
n_qubits = 3
m = 3
kappa = 1.0

[experiment.capacity]
"#,
    },
];

pub fn find(name: &str) -> Option<&'static Preset> {
    PRESETS.iter().find(|p| p.name == name)
}
