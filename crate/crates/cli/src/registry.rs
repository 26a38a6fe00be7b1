//! Built-in kernels and models available to scenario configs.

use std::collections::BTreeMap;
use std::fmt::Write;

use pmme_core::kernels::MemoryKernel;
use pmme_core::Result;

pub struct ParamInfo {
    pub name: &'static str,
    pub default: f64,
    pub meaning: &'static str,
}

pub struct Entry {
    pub name: &'static str,
    pub formula: &'static str,
    pub params: &'static [ParamInfo],
}

impl Entry {
    pub fn param_names(&self) -> Vec<&'static str> {
        self.params.iter().map(|p| p.name).collect()
    }
}

const PI: f64 = std::f64::consts::PI;

pub const KERNELS: &[Entry] = &[
    Entry {
        name: "exponential",
        formula: "k(t) = A exp(-gamma t)",
        params: &[
            ParamInfo { name: "A", default: 6.0, meaning: "amplitude" },
            ParamInfo { name: "gamma", default: 1.1, meaning: "decay rate" },
        ],
    },
    Entry {
        name: "damped_oscillatory",
        formula: "k(t) = A exp(-(gamma - a) t) [cos(mu t) - (gamma/mu) sin(mu t)]",
        params: &[
            ParamInfo { name: "A", default: 6.0, meaning: "amplitude" },
            ParamInfo { name: "gamma", default: 1.1, meaning: "decay rate" },
            ParamInfo { name: "a", default: 1.0, meaning: "dephasing rate of the generator" },
            ParamInfo { name: "mu", default: PI, meaning: "oscillation frequency" },
        ],
    },
    Entry { name: "delta", formula: "k(t) = delta(t)", params: &[] },
    Entry {
        name: "appendix",
        formula: "k(t) = gamma exp(-gamma t)",
        params: &[ParamInfo { name: "gamma", default: 2.0, meaning: "kernel rate" }],
    },
    Entry {
        name: "biexponential",
        formula: "k(t) = A exp(-gamma t) + B exp(-beta t)",
        params: &[
            ParamInfo { name: "A", default: 6.0, meaning: "first amplitude" },
            ParamInfo { name: "gamma", default: 1.1, meaning: "first decay rate" },
            ParamInfo { name: "B", default: 0.0, meaning: "second amplitude, may be negative" },
            ParamInfo { name: "beta", default: 0.2, meaning: "second decay rate" },
        ],
    },
];

pub const MODELS: &[Entry] = &[
    Entry {
        name: "dephasing",
        formula: "L rho = (a/2)(sz rho sz - rho)",
        params: &[ParamInfo { name: "a", default: 1.0, meaning: "dephasing rate" }],
    },
    Entry {
        name: "amplitude_damping",
        formula: "L rho = gamma0 (N+1) D[s-] rho + gamma0 N D[s+] rho",
        params: &[
            ParamInfo { name: "gamma0", default: 1.0, meaning: "dissipation rate" },
            ParamInfo { name: "N", default: 0.5, meaning: "mean bath excitation" },
        ],
    },
    Entry { name: "custom", formula: "L rho = -i[H, rho] + sum_k rate_k D[L_k] rho", params: &[] },
];

pub fn kernel_entry(name: &str) -> Option<&'static Entry> {
    KERNELS.iter().find(|e| e.name == name)
}

/// Fill in defaults, rejecting parameters the kernel does not take.
pub fn resolve_params(
    entry: &Entry,
    given: &BTreeMap<String, f64>,
) -> std::result::Result<BTreeMap<String, f64>, String> {
    if let Some(unknown) = given.keys().find(|k| !entry.params.iter().any(|p| p.name == k.as_str())) {
        return Err(format!(
            "unknown parameter `{unknown}` for kernel `{}` (expected one of: {})",
            entry.name,
            entry.param_names().join(", ")
        ));
    }
    Ok(entry.params.iter().map(|p| (p.name.to_string(), given.get(p.name).copied().unwrap_or(p.default))).collect())
}

/// Build a registered kernel from fully resolved parameters.
pub fn build_kernel(name: &str, params: &BTreeMap<String, f64>) -> Result<MemoryKernel> {
    let p = |key: &str| params[key];
    match name {
        "exponential" => MemoryKernel::exponential(p("A"), p("gamma")),
        "damped_oscillatory" => MemoryKernel::damped_oscillatory(p("A"), p("gamma"), p("a"), p("mu")),
        "delta" => Ok(MemoryKernel::delta()),
        "appendix" => MemoryKernel::appendix(p("gamma")),
        "biexponential" => {
            let first = MemoryKernel::exponential(1.0, p("gamma"))?;
            let second = MemoryKernel::exponential(1.0, p("beta"))?;
            Ok(MemoryKernel::linear_combination(p("A"), &first, p("B"), &second))
        }
        other => Err(pmme_core::Error::InvalidParameter(format!("unknown kernel `{other}`"))),
    }
}

fn describe(out: &mut String, title: &str, entries: &[Entry]) {
    let _ = writeln!(out, "{title}:");
    for e in entries {
        let _ = writeln!(out, "  {:<20} {}", e.name, e.formula);
        for p in e.params {
            let _ = writeln!(out, "    {:<8} = {:<22} {}", p.name, format!("{}", p.default), p.meaning);
        }
    }
}

/// Kernel and model registry with parameter names and defaults.
pub fn list_builtins() -> String {
    let mut out = String::new();
    describe(&mut out, "kernels", KERNELS);
    out.push('\n');
    describe(&mut out, "models", MODELS);
    out
}
