use serde::{Deserialize, Serialize};

use super::ElectrostaticsError;

/// Electrode role. Ground screens stand in for accumulated 2DEG reservoirs
/// and are always held at zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ElectrodeRole {
    Gate,
    GroundScreen,
}

/// Axis-aligned electrode box `[x0, y0, z0, x1, y1, z1]` in nm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Electrode {
    pub name: String,
    #[serde(rename = "box")]
    pub bbox: [f64; 6],
    pub role: ElectrodeRole,
}

impl Electrode {
    pub fn new(name: &str, bbox: [f64; 6], role: ElectrodeRole) -> Self {
        Self {
            name: name.to_string(),
            bbox,
            role,
        }
    }

    pub fn gate(name: &str, bbox: [f64; 6]) -> Self {
        Self::new(name, bbox, ElectrodeRole::Gate)
    }

    pub fn screen(name: &str, bbox: [f64; 6]) -> Self {
        Self::new(name, bbox, ElectrodeRole::GroundScreen)
    }
}

/// Device geometry. The domain spans `[0, domain[a]]` along each axis; an
/// axis with zero extent is collapsed to a single node (2D and 1D modes).
/// The quantum-well evaluation plane is `z = well_depth`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateLayout {
    pub domain: [f64; 3],
    pub spacing: f64,
    pub well_depth: f64,
    pub electrodes: Vec<Electrode>,
}

/// Inclusive node ranges of a rasterized electrode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct NodeBox {
    pub lo: [usize; 3],
    pub hi: [usize; 3],
}

impl NodeBox {
    fn intersects(&self, other: &NodeBox) -> bool {
        (0..3).all(|a| self.lo[a] <= other.hi[a] && other.lo[a] <= self.hi[a])
    }
}

const SNAP_TOL: f64 = 1e-9;

impl GateLayout {
    pub fn from_json(text: &str) -> Result<Self, ElectrostaticsError> {
        let layout: GateLayout = serde_json::from_str(text)
            .map_err(|e| ElectrostaticsError::InvalidLayout(format!("parse error: {e}")))?;
        layout.validate()?;
        Ok(layout)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("layout serializes")
    }

    /// Node count per axis.
    pub fn shape(&self) -> [usize; 3] {
        let mut n = [1usize; 3];
        for (a, slot) in n.iter_mut().enumerate() {
            if self.domain[a] > 0.0 {
                *slot = (self.domain[a] / self.spacing).round() as usize + 1;
            }
        }
        n
    }

    pub fn electrode(&self, name: &str) -> Option<&Electrode> {
        self.electrodes.iter().find(|e| e.name == name)
    }

    /// Index of the node layer holding the evaluation plane.
    pub fn well_index(&self) -> usize {
        (self.well_depth / self.spacing).round() as usize
    }

    pub(crate) fn rasterize(&self, e: &Electrode) -> Option<NodeBox> {
        let n = self.shape();
        let mut lo = [0usize; 3];
        let mut hi = [0usize; 3];
        for a in 0..3 {
            let (c0, c1) = (e.bbox[a], e.bbox[a + 3]);
            if n[a] == 1 {
                // collapsed axis: the box must contain the single node at 0
                if c0 > SNAP_TOL || c1 < -SNAP_TOL {
                    return None;
                }
                continue;
            }
            // a node on an electrode face belongs to the electrode
            let first = ((c0 / self.spacing) - SNAP_TOL).ceil().max(0.0) as usize;
            let last = ((c1 / self.spacing) + SNAP_TOL).floor();
            if last < 0.0 {
                return None;
            }
            let last = (last as usize).min(n[a] - 1);
            if first > last {
                return None;
            }
            lo[a] = first;
            hi[a] = last;
        }
        Some(NodeBox { lo, hi })
    }

    pub fn validate(&self) -> Result<(), ElectrostaticsError> {
        let bad = |msg: String| Err(ElectrostaticsError::InvalidLayout(msg));
        if !(self.spacing > 0.0 && self.spacing.is_finite()) {
            return bad(format!("spacing must be positive, got {}", self.spacing));
        }
        for a in 0..3 {
            let ext = self.domain[a];
            if !(ext >= 0.0 && ext.is_finite()) {
                return bad(format!("domain extent {a} must be finite and >= 0"));
            }
            let cells = ext / self.spacing;
            if (cells - cells.round()).abs() > 1e-6 {
                return bad(format!(
                    "domain extent {ext} nm on axis {a} is not a multiple of the spacing"
                ));
            }
        }
        if self.domain[2] <= 0.0 {
            return bad("the z axis must not be collapsed".into());
        }
        if !(self.well_depth > 0.0 && self.well_depth < self.domain[2]) {
            return bad(format!(
                "well_depth {} must lie strictly inside (0, {})",
                self.well_depth, self.domain[2]
            ));
        }
        let k = self.well_depth / self.spacing;
        if (k - k.round()).abs() > 1e-6 {
            return bad("well_depth must sit on a grid node".into());
        }

        let mut boxes = Vec::with_capacity(self.electrodes.len());
        for (i, e) in self.electrodes.iter().enumerate() {
            if self.electrodes[..i].iter().any(|o| o.name == e.name) {
                return bad(format!("duplicate electrode name {:?}", e.name));
            }
            for a in 0..3 {
                let (c0, c1) = (e.bbox[a], e.bbox[a + 3]);
                if c0 > c1 {
                    return bad(format!("electrode {:?}: inverted box on axis {a}", e.name));
                }
                if c0 < -SNAP_TOL || c1 > self.domain[a] + SNAP_TOL {
                    return bad(format!(
                        "electrode {:?} leaves the domain on axis {a}",
                        e.name
                    ));
                }
            }
            let nb = self.rasterize(e).ok_or_else(|| {
                ElectrostaticsError::InvalidLayout(format!(
                    "electrode {:?} covers no grid node",
                    e.name
                ))
            })?;
            for (other, ob) in self.electrodes[..i].iter().zip(&boxes) {
                if nb.intersects(ob) {
                    return bad(format!(
                        "electrodes {:?} and {:?} overlap",
                        other.name, e.name
                    ));
                }
            }
            boxes.push(nb);
        }

        // The plane may touch electrodes only where they sit on the outer
        // boundary (those nodes are boundary values anyway).
        let n = self.shape();
        let kw = self.well_index();
        for (e, nb) in self.electrodes.iter().zip(&boxes) {
            if kw < nb.lo[2] || kw > nb.hi[2] {
                continue;
            }
            let interior = |a: usize| {
                if n[a] == 1 {
                    Some((0, 0))
                } else {
                    let lo = nb.lo[a].max(1);
                    let hi = nb.hi[a].min(n[a] - 2);
                    (lo <= hi).then_some((lo, hi))
                }
            };
            if interior(0).is_some() && interior(1).is_some() {
                return bad(format!(
                    "electrode {:?} intersects the evaluation plane",
                    e.name
                ));
            }
        }
        Ok(())
    }
}

/// Dot positions `(x, y)` in nm used with [`split_gate_example`].
pub const EXAMPLE_DOT_1: [f64; 2] = [160.0, 140.0];
pub const EXAMPLE_DOT_2: [f64; 2] = [240.0, 140.0];

/// Illustrative split-gate accumulation-mode DQD.
///
/// Channel runs along x at y = 140 nm with the well plane at z = 50 nm.
/// Layer 1 holds the split upper screening gate (S1 over dot 1, CP over
/// dot 2) and a lower screen S2; layer 2 the plungers and reservoir gates;
/// layer 3 the barriers. The source/drain 2DEG is modeled by two grounded
/// slabs just above the well. All coordinates are multiples of 5 nm.
pub fn split_gate_example(spacing: f64) -> GateLayout {
    let l1 = (100.0, 110.0);
    let l2 = (115.0, 125.0);
    let l3 = (130.0, 140.0);
    let electrodes = vec![
        Electrode::gate("S1", [20.0, 175.0, l1.0, 170.0, 250.0, l1.1]),
        Electrode::gate("CP", [180.0, 175.0, l1.0, 380.0, 250.0, l1.1]),
        Electrode::gate("S2", [20.0, 30.0, l1.0, 380.0, 105.0, l1.1]),
        Electrode::gate("S", [20.0, 115.0, l2.0, 100.0, 165.0, l2.1]),
        Electrode::gate("P1", [140.0, 115.0, l2.0, 180.0, 165.0, l2.1]),
        Electrode::gate("P2", [220.0, 115.0, l2.0, 260.0, 165.0, l2.1]),
        Electrode::gate("D", [300.0, 115.0, l2.0, 380.0, 165.0, l2.1]),
        Electrode::gate("B1", [110.0, 100.0, l3.0, 130.0, 180.0, l3.1]),
        Electrode::gate("B2", [190.0, 100.0, l3.0, 210.0, 180.0, l3.1]),
        Electrode::gate("B3", [270.0, 100.0, l3.0, 290.0, 180.0, l3.1]),
        Electrode::screen("2DEG_S", [20.0, 115.0, 55.0, 90.0, 165.0, 60.0]),
        Electrode::screen("2DEG_D", [310.0, 115.0, 55.0, 380.0, 165.0, 60.0]),
    ];
    GateLayout {
        domain: [400.0, 280.0, 180.0],
        spacing,
        well_depth: 50.0,
        electrodes,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plate(d: f64) -> GateLayout {
        GateLayout {
            domain: [0.0, 0.0, d],
            spacing: 1.0,
            well_depth: d / 2.0,
            electrodes: vec![Electrode::gate("hot", [0.0, 0.0, 0.0, 0.0, 0.0, 0.0])],
        }
    }

    #[test]
    fn example_is_valid() {
        split_gate_example(5.0).validate().unwrap();
        split_gate_example(2.5).validate().unwrap();
    }

    #[test]
    fn collapsed_axes() {
        let l = plate(10.0);
        l.validate().unwrap();
        assert_eq!(l.shape(), [1, 1, 11]);
        let nb = l.rasterize(&l.electrodes[0]).unwrap();
        assert_eq!(nb.lo, [0, 0, 0]);
        assert_eq!(nb.hi, [0, 0, 0]);
    }

    #[test]
    fn face_nodes_belong_to_electrode() {
        let mut l = split_gate_example(5.0);
        l.electrodes.truncate(1);
        let nb = l.rasterize(&l.electrodes[0]).unwrap();
        assert_eq!(nb.lo, [4, 35, 20]);
        assert_eq!(nb.hi, [34, 50, 22]);
    }

    #[test]
    fn rejects_overlap() {
        let mut l = split_gate_example(5.0);
        l.electrodes.push(Electrode::gate(
            "X",
            [150.0, 120.0, 118.0, 160.0, 130.0, 122.0],
        ));
        let err = l.validate().unwrap_err().to_string();
        assert!(err.contains("overlap"), "{err}");
    }

    #[test]
    fn rejects_plane_intersection() {
        let mut l = split_gate_example(5.0);
        l.electrodes.push(Electrode::screen(
            "X",
            [300.0, 200.0, 45.0, 320.0, 220.0, 55.0],
        ));
        let err = l.validate().unwrap_err().to_string();
        assert!(err.contains("evaluation plane"), "{err}");
    }

    #[test]
    fn rejects_bad_geometry() {
        let mut l = plate(10.0);
        l.well_depth = 10.0;
        assert!(l.validate().is_err());
        let mut l = plate(10.0);
        l.spacing = 3.0;
        assert!(l.validate().is_err());
        let mut l = plate(10.0);
        l.electrodes[0].bbox[5] = 12.0;
        assert!(l.validate().is_err());
        let mut l = plate(10.0);
        l.electrodes.push(l.electrodes[0].clone());
        assert!(l.validate().is_err());
    }

    #[test]
    fn json_schema() {
        let text = r#"{
            "domain": [0, 0, 10], "spacing": 1, "well_depth": 5,
            "electrodes": [
                {"name": "top", "box": [0,0,0,0,0,0], "role": "gate"},
                {"name": "bot", "box": [0,0,10,0,0,10], "role": "ground-screen"}
            ]
        }"#;
        let l = GateLayout::from_json(text).unwrap();
        assert_eq!(l.electrodes[1].role, ElectrodeRole::GroundScreen);
        let back = GateLayout::from_json(&l.to_json()).unwrap();
        assert_eq!(back, l);
    }
}
