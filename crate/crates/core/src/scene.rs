//! Scene geometry: corridor configuration, mirror-plane reflection, and
//! the finite-rectangle intersection test for the reflector panel.
//!
//! Coordinate frame: right-handed, origin at the corridor corner, x along
//! the transmitter leg, y along the NLoS leg, z up. The transmitter sits
//! at negative x looking down the corridor; the receiver grid occupies the
//! NLoS leg at positive y. With the default 45-degree azimuth the panel
//! plane is the corner diagonal x = y, so reflection across it swaps the
//! x and y coordinates.

use serde::Deserialize;

use crate::error::{Error, Result};

/// Tolerance for classifying a point as on the mirror plane, in meters.
pub const PLANE_TOL: f64 = 1e-9;

/// Speed of light, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// A point (or displacement vector) in the scene frame, in meters.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(from = "[f64; 3]")]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn dot(self, other: Self) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn length(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn distance(self, other: Self) -> f64 {
        (self - other).length()
    }

    /// Distance ignoring z, used for in-plane grid queries.
    pub fn horizontal_distance(self, other: Self) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        (dx * dx + dy * dy).sqrt()
    }
}

impl From<[f64; 3]> for Point3 {
    fn from(v: [f64; 3]) -> Self {
        Self::new(v[0], v[1], v[2])
    }
}

impl std::ops::Sub for Point3 {
    type Output = Point3;
    fn sub(self, rhs: Self) -> Point3 {
        Point3::new(self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
    }
}

impl std::ops::Add for Point3 {
    type Output = Point3;
    fn add(self, rhs: Self) -> Point3 {
        Point3::new(self.x + rhs.x, self.y + rhs.y, self.z + rhs.z)
    }
}

impl std::ops::Mul<f64> for Point3 {
    type Output = Point3;
    fn mul(self, s: f64) -> Point3 {
        Point3::new(self.x * s, self.y * s, self.z * s)
    }
}

/// Reflector panel surface material.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaterialKind {
    Silver,
    Copper,
    SilverCoatedMirror,
    Foam,
}

impl MaterialKind {
    pub const ALL: [MaterialKind; 4] = [
        MaterialKind::Silver,
        MaterialKind::Copper,
        MaterialKind::SilverCoatedMirror,
        MaterialKind::Foam,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MaterialKind::Silver => "silver",
            MaterialKind::Copper => "copper",
            MaterialKind::SilverCoatedMirror => "silver_coated_mirror",
            MaterialKind::Foam => "foam",
        }
    }
}

impl std::str::FromStr for MaterialKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        MaterialKind::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown material '{s}'")))
    }
}

impl std::fmt::Display for MaterialKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Reflection loss per material, in dB relative to an ideal reflector.
///
/// The values are free parameters; only the ordering
/// silver < copper = silver_coated_mirror < foam is enforced, matching the
/// measured ranking of the four surfaces.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MaterialTable {
    pub silver: f64,
    pub copper: f64,
    pub silver_coated_mirror: f64,
    pub foam: f64,
}

impl Default for MaterialTable {
    fn default() -> Self {
        Self {
            silver: 0.0,
            copper: 1.0,
            silver_coated_mirror: 1.0,
            foam: 12.0,
        }
    }
}

impl MaterialTable {
    pub fn loss_db(&self, material: MaterialKind) -> f64 {
        match material {
            MaterialKind::Silver => self.silver,
            MaterialKind::Copper => self.copper,
            MaterialKind::SilverCoatedMirror => self.silver_coated_mirror,
            MaterialKind::Foam => self.foam,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.silver, self.copper, self.silver_coated_mirror, self.foam];
        if !all.iter().all(|v| v.is_finite()) {
            return Err(Error::Config("material losses must be finite".into()));
        }
        if !(self.silver < self.copper
            && self.copper == self.silver_coated_mirror
            && self.copper < self.foam)
        {
            return Err(Error::Config(
                "material losses must satisfy silver < copper = silver_coated_mirror < foam"
                    .into(),
            ));
        }
        Ok(())
    }
}

/// Flat rectangular reflector panel.
///
/// `azimuth` is the rotation, in degrees, of the panel normal away from
/// facing straight down the transmitter leg towards the NLoS leg; 45 puts
/// the panel plane on the corner diagonal. `width` is the in-plane
/// horizontal extent and `height` the vertical extent; the bottom edge
/// sits at `mount_height`, so `center.z = mount_height + height / 2`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReflectorPanel {
    pub center: Point3,
    pub azimuth: f64,
    pub width: f64,
    pub height: f64,
    pub mount_height: f64,
    pub material: MaterialKind,
}

impl Default for ReflectorPanel {
    fn default() -> Self {
        Self {
            center: Point3::new(1.25, 1.25, 1.5),
            azimuth: 45.0,
            width: 0.9,
            height: 0.3,
            mount_height: 1.35,
            material: MaterialKind::SilverCoatedMirror,
        }
    }
}

impl ReflectorPanel {
    /// Same panel resized, keeping its bottom edge at `mount_height`.
    pub fn with_size(&self, width: f64, height: f64) -> Self {
        let mut panel = self.clone();
        panel.width = width;
        panel.height = height;
        panel.center.z = panel.mount_height + height / 2.0;
        panel
    }

    /// Unit normal of the panel plane (horizontal).
    pub fn normal(&self) -> Point3 {
        let az = self.azimuth.to_radians();
        Point3::new(-az.cos(), az.sin(), 0.0)
    }

    /// Unit in-plane horizontal direction.
    pub fn tangent(&self) -> Point3 {
        let az = self.azimuth.to_radians();
        Point3::new(az.sin(), az.cos(), 0.0)
    }

    /// Signed distance of `p` from the panel plane.
    pub fn signed_distance(&self, p: Point3) -> f64 {
        (p - self.center).dot(self.normal())
    }

    pub fn validate(&self) -> Result<()> {
        if !self.center.is_finite() {
            return Err(Error::Config("panel center must be finite".into()));
        }
        if !(self.width > 0.0 && self.width.is_finite()) {
            return Err(Error::Config("panel width must be positive".into()));
        }
        if !(self.height > 0.0 && self.height.is_finite()) {
            return Err(Error::Config("panel height must be positive".into()));
        }
        if !(self.azimuth > 0.0 && self.azimuth < 90.0) {
            return Err(Error::Config(
                "panel azimuth must lie strictly between 0 and 90 degrees".into(),
            ));
        }
        Ok(())
    }
}

/// Full scene: corridor, transmitter, LiDAR, panel and material losses.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SceneConfig {
    pub corridor_width: f64,
    pub tx_position: Point3,
    pub rx_height: f64,
    pub lidar_position: Point3,
    pub panel: ReflectorPanel,
    pub carrier_frequency: f64,
    pub materials: MaterialTable,
}

impl Default for SceneConfig {
    fn default() -> Self {
        // Transmitter 3.8 m down the corridor from the panel center, at
        // beam height, with the LiDAR collocated.
        let tx = Point3::new(1.25 - 3.8, 1.25, 1.5);
        Self {
            corridor_width: 2.5,
            tx_position: tx,
            rx_height: 1.5,
            lidar_position: tx,
            panel: ReflectorPanel::default(),
            carrier_frequency: 60e9,
            materials: MaterialTable::default(),
        }
    }
}

impl SceneConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.corridor_width > 0.0 && self.corridor_width.is_finite()) {
            return Err(Error::Config("corridor_width must be positive".into()));
        }
        if !(self.carrier_frequency > 0.0 && self.carrier_frequency.is_finite()) {
            return Err(Error::Config("carrier_frequency must be positive".into()));
        }
        if !self.tx_position.is_finite() || !self.lidar_position.is_finite() {
            return Err(Error::Config("positions must be finite".into()));
        }
        if !self.rx_height.is_finite() {
            return Err(Error::Config("rx_height must be finite".into()));
        }
        self.panel.validate()?;
        self.materials.validate()?;
        if self.panel.signed_distance(self.tx_position).abs() <= PLANE_TOL {
            return Err(Error::Config(
                "tx_position must not lie on the panel plane".into(),
            ));
        }
        Ok(())
    }
}

/// Mirror image of `p` across the infinite plane containing the panel.
pub fn image_point(p: Point3, panel: &ReflectorPanel) -> Point3 {
    let n = panel.normal();
    let s = (p - panel.center).dot(n);
    p - n * (2.0 * s)
}

/// Whether the open segment (a, b) crosses the finite panel rectangle.
///
/// Endpoints within `PLANE_TOL` of the plane do not count as a crossing.
pub fn segment_intersects_panel(a: Point3, b: Point3, panel: &ReflectorPanel) -> Result<bool> {
    if a == b {
        return Err(Error::DegenerateSegment);
    }
    let sa = panel.signed_distance(a);
    let sb = panel.signed_distance(b);
    let crosses = (sa > PLANE_TOL && sb < -PLANE_TOL) || (sa < -PLANE_TOL && sb > PLANE_TOL);
    if !crosses {
        return Ok(false);
    }
    let t = sa / (sa - sb);
    let q = a + (b - a) * t;
    let rel = q - panel.center;
    Ok(rel.dot(panel.tangent()).abs() <= panel.width * 0.5 && rel.z.abs() <= panel.height * 0.5)
}

/// Unfolded specular path length from `tx` to `rx` via the panel plane:
/// the distance from the image of `tx` to `rx`.
pub fn path_length_via_panel(tx: Point3, rx: Point3, panel: &ReflectorPanel) -> Result<f64> {
    let sa = panel.signed_distance(tx);
    let sb = panel.signed_distance(rx);
    if sa * sb < 0.0 && sa.abs() > PLANE_TOL && sb.abs() > PLANE_TOL {
        return Err(Error::NoSpecularPath(
            "tx and rx lie on opposite sides of the panel plane".into(),
        ));
    }
    Ok(image_point(tx, panel).distance(rx))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag_panel_at_origin() -> ReflectorPanel {
        ReflectorPanel {
            center: Point3::new(0.0, 0.0, 0.0),
            ..ReflectorPanel::default()
        }
    }

    #[test]
    fn image_of_point_on_plane_is_itself() {
        let panel = ReflectorPanel::default();
        // center.x == center.y, so any point with x == y is on the plane.
        let p = Point3::new(2.0, 2.0, 0.7);
        let img = image_point(p, &panel);
        assert!(img.distance(p) < 1e-12);
    }

    #[test]
    fn image_is_involution() {
        let panel = ReflectorPanel::default();
        let p = Point3::new(-1.3, 2.2, 0.4);
        let back = image_point(image_point(p, &panel), &panel);
        assert!(back.distance(p) < 1e-12);
    }

    #[test]
    fn diagonal_plane_through_origin_swaps_x_and_y() {
        let panel = diag_panel_at_origin();
        let p = Point3::new(1.0, 2.0, 3.0);
        let img = image_point(p, &panel);
        assert!((img.x - 2.0).abs() < 1e-12);
        assert!((img.y - 1.0).abs() < 1e-12);
        assert!((img.z - 3.0).abs() < 1e-12);
    }

    #[test]
    fn central_perpendicular_crossing_hits_panel() {
        let panel = ReflectorPanel::default();
        let n = panel.normal();
        let a = panel.center + n * 1.0;
        let b = panel.center + n * -1.0;
        assert!(segment_intersects_panel(a, b, &panel).unwrap());
    }

    #[test]
    fn one_sided_segment_misses() {
        let panel = ReflectorPanel::default();
        let n = panel.normal();
        let a = panel.center + n * 0.5;
        let b = panel.center + n * 2.5;
        assert!(!segment_intersects_panel(a, b, &panel).unwrap());
    }

    #[test]
    fn crossing_outside_rectangle_edge_misses() {
        // Crossing point 0.5 m beyond the width edge of the rectangle.
        let panel = ReflectorPanel::default();
        let hit = panel.center + panel.tangent() * (panel.width / 2.0 + 0.5);
        let a = hit + panel.normal() * 1.0;
        let b = hit + panel.normal() * -1.0;
        assert!(!segment_intersects_panel(a, b, &panel).unwrap());
        // Same construction through the center does hit.
        let a = panel.center + panel.normal() * 1.0;
        let b = panel.center + panel.normal() * -1.0;
        assert!(segment_intersects_panel(a, b, &panel).unwrap());
    }

    #[test]
    fn degenerate_segment_is_an_error() {
        let panel = ReflectorPanel::default();
        let p = Point3::new(0.3, 0.4, 0.5);
        assert!(matches!(
            segment_intersects_panel(p, p, &panel),
            Err(Error::DegenerateSegment)
        ));
    }

    #[test]
    fn segment_touching_plane_at_endpoint_does_not_cross() {
        let panel = ReflectorPanel::default();
        let a = panel.center; // exactly on the plane, at the rectangle center
        let b = panel.center + panel.normal() * 1.0;
        assert!(!segment_intersects_panel(a, b, &panel).unwrap());
    }

    #[test]
    fn path_length_to_self_is_twice_plane_distance() {
        let panel = diag_panel_at_origin();
        let tx = panel.center + panel.normal() * 2.0;
        let d = path_length_via_panel(tx, tx, &panel).unwrap();
        assert!((d - 4.0).abs() < 1e-12);
    }

    #[test]
    fn path_length_to_point_on_plane_equals_direct_distance() {
        let panel = diag_panel_at_origin();
        let tx = Point3::new(-1.0, 2.0, 0.5);
        let rx = Point3::new(1.5, 1.5, 0.0); // x == y: on the plane
        let d = path_length_via_panel(tx, rx, &panel).unwrap();
        assert!((d - tx.distance(rx)).abs() < 1e-12);
    }

    #[test]
    fn opposite_sides_have_no_specular_path() {
        let panel = diag_panel_at_origin();
        let n = panel.normal();
        let tx = panel.center + n * 1.0;
        let rx = panel.center + n * -1.0;
        assert!(matches!(
            path_length_via_panel(tx, rx, &panel),
            Err(Error::NoSpecularPath(_))
        ));
    }

    #[test]
    fn material_table_default_ordering_holds() {
        let table = MaterialTable::default();
        table.validate().unwrap();
        assert!(table.loss_db(MaterialKind::Silver) < table.loss_db(MaterialKind::Copper));
        assert_eq!(
            table.loss_db(MaterialKind::Copper),
            table.loss_db(MaterialKind::SilverCoatedMirror)
        );
        assert!(table.loss_db(MaterialKind::Foam) > table.loss_db(MaterialKind::Copper));
    }

    #[test]
    fn material_table_rejects_misordered_losses() {
        let table = MaterialTable {
            silver: 2.0,
            ..MaterialTable::default()
        };
        assert!(table.validate().is_err());
    }

    #[test]
    fn panel_rejects_bad_azimuth() {
        for az in [0.0, 90.0, -10.0, 120.0] {
            let panel = ReflectorPanel {
                azimuth: az,
                ..ReflectorPanel::default()
            };
            assert!(panel.validate().is_err(), "azimuth {az} should be rejected");
        }
    }

    #[test]
    fn default_scene_validates_and_faces_the_tx() {
        let scene = SceneConfig::default();
        scene.validate().unwrap();
        // tx and a mid-grid receiver share a side of the plane.
        let rx = Point3::new(1.25, 5.0, 1.5);
        let st = scene.panel.signed_distance(scene.tx_position);
        let sr = scene.panel.signed_distance(rx);
        assert!(st * sr > 0.0);
    }

    #[test]
    fn resizing_keeps_bottom_edge_on_the_mount() {
        let panel = ReflectorPanel::default();
        let grown = panel.with_size(0.9, 0.9);
        assert!((grown.center.z - grown.height / 2.0 - grown.mount_height).abs() < 1e-12);
        assert_eq!(grown.width, 0.9);
    }
}
