use serde::Serialize;

use super::scalar::Scalar;

/// Per-component power parameters, in watts.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PowerConfig<S> {
    pub package_w: S,
    pub per_ddr_ctrl_w: S,
    pub per_ddr_phy_w: S,
    pub per_pcie_lane_w: S,
}

impl<S: Scalar> Default for PowerConfig<S> {
    fn default() -> Self {
        PowerConfig {
            package_w: S::from_int(500),
            per_ddr_ctrl_w: S::from_fraction(5, 10),
            per_ddr_phy_w: S::from_fraction(6, 10),
            per_pcie_lane_w: S::from_fraction(2, 10),
        }
    }
}

/// Component counts of a full server and its DIMM power, which comes from an
/// external DRAM power calculator.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SystemCounts<S> {
    pub name: String,
    pub ddr_channels: u32,
    pub pcie_lanes: u32,
    pub dimm_power_w: S,
    pub cpi: S,
}

impl<S: Scalar> SystemCounts<S> {
    /// 144-core baseline: 12 DDR5 channels driven from the package.
    pub fn baseline() -> Self {
        SystemCounts {
            name: "ddr-baseline".into(),
            ddr_channels: 12,
            pcie_lanes: 0,
            dimm_power_w: S::from_int(200),
            cpi: S::from_fraction(202, 100),
        }
    }

    /// 48 DDR5 channels behind 48 x8 links.
    pub fn coaxial_4x() -> Self {
        SystemCounts {
            name: "coaxial-4x".into(),
            ddr_channels: 48,
            pcie_lanes: 384,
            dimm_power_w: S::from_int(551),
            cpi: S::from_fraction(133, 100),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PowerBreakdown<S> {
    pub package_w: S,
    pub ddr_ctrl_w: S,
    pub ddr_phy_w: S,
    pub pcie_w: S,
    pub dimm_w: S,
    pub total_w: S,
}

pub fn system_power<S: Scalar>(counts: &SystemCounts<S>, cfg: &PowerConfig<S>) -> PowerBreakdown<S> {
    let ch = S::from_int(counts.ddr_channels as i64);
    let lanes = S::from_int(counts.pcie_lanes as i64);
    let ddr_ctrl_w = ch.clone() * cfg.per_ddr_ctrl_w.clone();
    let ddr_phy_w = ch * cfg.per_ddr_phy_w.clone();
    let pcie_w = lanes * cfg.per_pcie_lane_w.clone();
    let total_w =
        cfg.package_w.clone() + ddr_ctrl_w.clone() + ddr_phy_w.clone() + pcie_w.clone() + counts.dimm_power_w.clone();
    PowerBreakdown {
        package_w: cfg.package_w.clone(),
        ddr_ctrl_w,
        ddr_phy_w,
        pcie_w,
        dimm_w: counts.dimm_power_w.clone(),
        total_w,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EdpResult<S> {
    pub total_power_w: S,
    pub cpi: S,
    pub edp: S,
}

/// Energy-delay product: power × CPI².
pub fn edp<S: Scalar>(power_w: S, cpi: S) -> EdpResult<S> {
    let edp = power_w.clone() * cpi.clone() * cpi.clone();
    EdpResult { total_power_w: power_w, cpi, edp }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Ratio;

    type Q = Ratio<i64>;

    #[test]
    fn totals_exact() {
        let cfg = PowerConfig::<Q>::default();
        let base = system_power(&SystemCounts::baseline(), &cfg);
        assert_eq!(base.total_w, Q::new(7132, 10));
        let cx = system_power(&SystemCounts::coaxial_4x(), &cfg);
        assert_eq!(cx.total_w, Q::new(11806, 10));
        assert_eq!(cx.pcie_w, Q::new(768, 10));
    }

    #[test]
    fn package_only() {
        let counts = SystemCounts { name: "bare".into(), ddr_channels: 0, pcie_lanes: 0, dimm_power_w: 0.0, cpi: 1.0 };
        assert_eq!(system_power(&counts, &PowerConfig::<f64>::default()).total_w, 500.0);
    }

    #[test]
    fn edp_identity_and_table() {
        assert_eq!(edp(640.0, 1.0).edp, 640.0);
        let e = edp(Q::from_integer(713), Q::new(202, 100));
        assert_eq!(e.edp, Q::new(713 * 202 * 202, 10_000));
    }
}
