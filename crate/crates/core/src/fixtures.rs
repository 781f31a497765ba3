//! Five logged rows from a play session and an AoI layout consistent with their labels.

pub const REFERENCE_LOG_CSV: &str = "Timestamp,X,Y,Message,Obj-X,Obj-Y,Obj-Z
1.702E+12,683,319,Q3-In AoI-Mushroom,964.4,524.4,-3.5
1.702E+12,842,294,Q3-Not in AoI-Mushroom,,,
1.702E+12,1213,262,Q4-AoI-Mushroom,,,
1.702E+12,1320,224,Q4-In AoI - No Stimuli,964.4,524.4,-3.5
1.702E+12,1319,225,Q4-AoI-No Stimuli,,,
";

/// Left AoI holds (683,319) but not (842,294); right AoI holds (1320,224).
pub const REFERENCE_AOI_JSON: &str = r#"[
  {"aoi_id": "left-patch", "x": 600, "y": 250, "width": 200, "height": 150, "role": "target"},
  {"aoi_id": "right-patch", "x": 1250, "y": 180, "width": 150, "height": 100, "role": "target"}
]
"#;

pub const EXPECTED_QUADRANTS: [&str; 5] = ["Q3", "Q3", "Q4", "Q4", "Q4"];
