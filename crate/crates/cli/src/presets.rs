//! The experiment presets and their descriptions.

use crate::error::CliError;
use crate::experiments::defaults as d;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Preset {
    ShadowingLipschitz,
    ConjugacyResidual,
    QuasiConjugacy,
    BirkhoffStability,
    PeriodicMeasure,
    IrregularPoint,
    Entropy,
    CltAsip,
}

impl Preset {
    pub const ALL: [Preset; 8] = [
        Preset::ShadowingLipschitz,
        Preset::ConjugacyResidual,
        Preset::QuasiConjugacy,
        Preset::BirkhoffStability,
        Preset::PeriodicMeasure,
        Preset::IrregularPoint,
        Preset::Entropy,
        Preset::CltAsip,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::ShadowingLipschitz => "shadowing-lipschitz",
            Preset::ConjugacyResidual => "conjugacy-residual",
            Preset::QuasiConjugacy => "quasi-conjugacy",
            Preset::BirkhoffStability => "birkhoff-stability",
            Preset::PeriodicMeasure => "periodic-measure",
            Preset::IrregularPoint => "irregular-point",
            Preset::Entropy => "entropy",
            Preset::CltAsip => "clt-asip",
        }
    }

    pub fn from_name(name: &str) -> Result<Self, CliError> {
        Self::ALL.into_iter().find(|p| p.name() == name).ok_or_else(|| {
            CliError::Config(format!(
                "unknown preset '{name}'; valid presets: {}",
                Self::ALL.map(|p| p.name()).join(", ")
            ))
        })
    }

    /// Tolerances a config may override. Checks whose threshold is a derived
    /// bound (for example 2λε/(1−λ)) are not listed.
    pub fn tolerance_names(self) -> &'static [&'static str] {
        match self {
            Preset::ShadowingLipschitz => &["beta-bound", "slope", "certified"],
            Preset::ConjugacyResidual => &["residual", "oracle", "proximity-spread", "tail-final", "tail-monotone"],
            Preset::QuasiConjugacy => &[],
            Preset::BirkhoffStability => &["within-fraction", "ks-median"],
            Preset::PeriodicMeasure => &["ks"],
            Preset::IrregularPoint => &["limsup", "liminf", "gap-persistence"],
            Preset::Entropy => &["comparison"],
            Preset::CltAsip => &[
                "sigma2",
                "sigma2-coboundary",
                "clt-p-F",
                "clt-p-T",
                "collapse",
                "drift-exponent",
            ],
        }
    }

    pub fn describe(self) -> String {
        match self {
            Preset::ShadowingLipschitz => format!(
                "shadowing-lipschitz: Lipschitz shadowing of δ-pseudo-orbits.\n\
                 Anchor: shadowing for expanding circle sequences (β ≤ λδ/(1−λ)) and for Anosov\n\
                 sequences on T² via cone conditions (β ≤ Lδ, unique shadow).\n\
                 Sequences: F.\n\
                 Knobs: deltas (default {:?}), trials ({}), len ({}), tol ({:e}).\n\
                 Checks: beta-bound on S¹, slope of log β against log δ on T² (1 ± {}), certified.\n\
                 Outputs: trials.csv, deltas.csv, summary.json.",
                d::DELTAS,
                d::TRIALS,
                d::LEN,
                d::TOL,
                d::SLOPE_TOL
            ),
            Preset::ConjugacyResidual => format!(
                "conjugacy-residual: sequential conjugacies h_n with h_n∘F_n = G_n∘h_0.\n\
                 Anchor: structural stability of expanding and Anosov sequences, with explicit\n\
                 Lipschitz dependence of the conjugacy on |||F − G|||.\n\
                 Sequences: F, optional G (residual and oracle), optional T (convergent tail).\n\
                 Knobs: resolution (default {}), depth ({}), steps (residual n_max, off if unset),\n\
                 oracle_points ({}), compare (sequences for the proximity sweep), tail_shifts ({}).\n\
                 Checks: residual < {:e}, oracle < {:e}, proximity-spread < {}, proximity-lipschitz,\n\
                 tail-monotone, tail-final < {:e}.\n\
                 Outputs: residual.csv, conjugacy.csv, proximity.csv, tail.csv, summary.json.",
                d::RESOLUTION,
                d::DEPTH,
                d::ORACLE_POINTS,
                d::TAIL_SHIFTS,
                d::RESIDUAL_TOL,
                d::RESIDUAL_TOL,
                d::SPREAD_TOL,
                d::TAIL_FINAL_TOL
            ),
            Preset::QuasiConjugacy => format!(
                "quasi-conjugacy: a single homeomorphism h with max_n d(G_n∘h, h∘F_n) ≤ 2λε/(1−λ).\n\
                 Anchor: quasi-conjugacy of nearby expanding sequences, ε = |||F − G|||_C0 below\n\
                 (1−λ)δ₀/(2λ).\n\
                 Sequences: F and the sequences named in compare.\n\
                 Knobs: compare (required), resolution (default {}), depth ({}).\n\
                 Checks: defect-<name> against 2λε/(1−λ), distance-<name> against λε/(1−λ).\n\
                 Outputs: quasi.csv, summary.json.",
                d::QUASI_RESOLUTION,
                d::DEPTH
            ),
            Preset::BirkhoffStability => format!(
                "birkhoff-stability: Birkhoff averages along a convergent-tail sequence.\n\
                 Anchor: asymptotic invariance; averages of h_*Lebesgue-typical points converge to\n\
                 the Lebesgue mean of φ and the empirical measures converge to Lebesgue.\n\
                 Sequences: F; the reference map is F's limit.\n\
                 Knobs: starts (default {}), n ({}), bins ({}), window ({}), trace_stride (n/1000).\n\
                 Checks: within-fraction ≥ {}, ks-median < {}.\n\
                 Outputs: starts.csv (start, x0, average, ks), trace.csv (m, running_avg),\n\
                 histogram.csv (bin_left, mass), summary.json.",
                d::STARTS,
                d::ORBIT_N,
                d::BINS,
                d::WINDOW,
                d::WITHIN_FRACTION,
                d::KS_MEDIAN_TOL
            ),
            Preset::PeriodicMeasure => format!(
                "periodic-measure: empirical measures of an N-periodic sequence.\n\
                 Anchor: for periodic sequences the orbit measures converge to (1/N)Σ(h_i)_*μ.\n\
                 Sequences: F (periodic). Knob reference names the map of the conjugate constant\n\
                 sequence (default: the first map of F).\n\
                 Knobs: resolution (default {}), depth ({}), n ({}), bins ({}).\n\
                 Checks: ks < {}.\n\
                 Outputs: histogram.csv (bin_left, direct_mass, mixture_mass), summary.json.",
                d::RESOLUTION,
                d::DEPTH,
                d::ORBIT_N,
                d::BINS,
                d::PERIODIC_KS_TOL
            ),
            Preset::IrregularPoint => format!(
                "irregular-point: an explicit Birkhoff-irregular point of the doubling map.\n\
                 Anchor: the irregular set is carried to the irregular set of a convergent-tail\n\
                 sequence by the conjugacy, with the averages moved by at most (1/n)Σ‖φ_j − φ‖_C0.\n\
                 Maps: the knob reference (default \"f\") must be the doubling map. Optional\n\
                 sequence T converging to it.\n\
                 Knobs: trace_len (default {}), trace_stride ({}), resolution ({}), depth ({}).\n\
                 Checks: limsup ≥ {}, liminf ≤ {}, gap-persistence ≤ {}, transport-budget.\n\
                 Outputs: trace.csv (m, running_avg[, running_avg_sequence]), probe.json, summary.json.",
                d::TRACE_LEN,
                d::TRACE_STRIDE,
                d::TRANSPORT_RESOLUTION,
                d::DEPTH,
                d::LIMSUP_MIN,
                d::LIMINF_MAX,
                d::GAP_TOL
            ),
            Preset::Entropy => format!(
                "entropy: topological entropy of map sequences by separated-set counting.\n\
                 Anchor: entropy of a sequence as the growth rate of (n,ε)-separated sets, its\n\
                 invariance under equiconjugacy and the comparison s_n(F, ε/3) ≥ s_n(f, ε) for\n\
                 sequences converging to f.\n\
                 Knobs: estimates (list of {{sequence, epsilons, ns, window_start, resolution,\n\
                 randomized}}: the ε schedule decreases and the n schedule increases),\n\
                 compare_epsilon and compare_ns (default {:?}) for sequence T, resolution\n\
                 (comparison grid, default {}), depth ({}).\n\
                 Checks: entropy-<sequence> against the analytic entropy (± {} on S¹, ± {} on T²;\n\
                 a convergent tail takes its limit's value), comparison (violations at n ≥ N_ε).\n\
                 Outputs: counts.csv (sequence, epsilon, n, count, slope), comparison.csv, summary.json.",
                d::COMPARE_NS,
                d::COMPARE_RESOLUTION,
                d::DEPTH,
                d::ENTROPY_TOL_CIRCLE,
                d::ENTROPY_TOL_TORUS
            ),
            Preset::CltAsip => format!(
                "clt-asip: statistical consequences of the almost sure invariance principle (ASIP).\n\
                 Anchor: the ASIP for sequences whose tail decays like a_j ≤ C j^(−(1/2+ε)/α); the\n\
                 Brownian coupling is not built, only its consequences are tested.\n\
                 Sequences: F (constant), optional T (convergent tail).\n\
                 Knobs: samples (default 2^{}), lag_max ({}), n ({}), ensemble ({}),\n\
                 sigma2_expected (unset), coboundary ({}), rate_c ({}), rate_epsilon ({}),\n\
                 rate_alpha ({}), n_max ({}).\n\
                 Checks: sigma2 (|σ² − sigma2_expected| ≤ {}), clt-p-F and clt-p-T (p > {}),\n\
                 rate-admissible-T, pathwise-T, sigma2-coboundary and collapse (sample variance\n\
                 < {}), drift-exponent (|fit − (1/2 − ε)| ≤ {}), drift-bound.\n\
                 Outputs: σ² (Green–Kubo) with standard error, KS per checkpoint, drift fit;\n\
                 files sums.csv (sequence, n, member, S_n), ks.csv, autocov.csv, rate.csv, summary.json.",
                d::SAMPLES.trailing_zeros(),
                d::LAG_MAX,
                d::ENSEMBLE_N,
                d::ENSEMBLE,
                d::COBOUNDARY,
                d::RATE_C,
                d::RATE_EPSILON,
                d::RATE_ALPHA,
                d::N_MAX,
                d::SIGMA2_TOL,
                d::CLT_P,
                d::COLLAPSE_TOL,
                d::DRIFT_TOL
            ),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for p in Preset::ALL {
            assert_eq!(Preset::from_name(p.name()).unwrap(), p);
        }
    }

    #[test]
    fn describe_mentions_key_outputs() {
        let clt = Preset::CltAsip.describe();
        assert!(clt.contains("ASIP") && clt.contains("σ²"));
        let ent = Preset::Entropy.describe();
        assert!(ent.contains("separated-set counting") && ent.contains("ε schedule") && ent.contains("n schedule"));
    }

    #[test]
    fn unknown_preset() {
        let e = Preset::from_name("bogus").unwrap_err();
        assert_eq!(e.exit_code(), 2);
    }
}
