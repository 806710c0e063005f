//! In-memory feature store with a bounding-box index, and the spatial
//! predicates evaluated against it.

mod predicates;
pub mod rtree;

use std::collections::HashMap;

use crate::crs::{LocalProjection, ProjectionMode};
use crate::error::{Error, Result};
use crate::feature::MapFeature;
use crate::geometry::{BBox, GeoPoint};

pub use predicates::{
    bearing_to, buffer_metrics, build_buffer, distance_to_feature, point_in_polygon, point_segment_distance,
    within_buffer, BufferZone, BUFFER_QUAD_SEGS,
};
use rtree::RTree;

/// How far (degrees, either axis) the UAV may stray from the cached
/// projection origin before a fresh projection is used.
pub const PROJECTION_RECENTER_DEG: f64 = 0.1;

/// Features keyed by `osm_id`, kept in ascending id order so every query
/// result is deterministic.
#[derive(Debug, Clone, Default)]
pub struct FeatureStore {
    features: Vec<MapFeature>,
    bboxes: Vec<BBox>,
    by_id: HashMap<i64, usize>,
    index: RTree,
    projection: Option<LocalProjection>,
}

impl FeatureStore {
    pub fn new(mut features: Vec<MapFeature>) -> Result<Self> {
        features.sort_by_key(|f| f.osm_id);
        if let Some(w) = features.windows(2).find(|w| w[0].osm_id == w[1].osm_id) {
            return Err(Error::InvalidInput(format!("duplicate osm_id {}", w[0].osm_id)));
        }
        let bboxes: Vec<BBox> = features.iter().map(|f| f.geometry.bbox()).collect();
        let by_id = features.iter().enumerate().map(|(i, f)| (f.osm_id, i)).collect();
        let index = RTree::bulk_load(bboxes.iter().copied().enumerate().map(|(i, b)| (b, i)).collect());
        let extent = bboxes.iter().fold(BBox::empty(), |acc, b| acc.union(b));
        let projection = if extent.is_empty() {
            None
        } else {
            let (lon, lat) = extent.center();
            GeoPoint::new(lon, lat).and_then(LocalProjection::standard).ok()
        };
        Ok(FeatureStore {
            features,
            bboxes,
            by_id,
            index,
            projection,
        })
    }

    /// Adds features and rebuilds the index.
    pub fn extend(&mut self, more: Vec<MapFeature>) -> Result<()> {
        let mut all = self.features.clone();
        all.extend(more);
        let projection = self.projection;
        *self = FeatureStore::new(all)?;
        if projection.is_some() {
            self.projection = projection;
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn features(&self) -> &[MapFeature] {
        &self.features
    }

    pub fn into_features(self) -> Vec<MapFeature> {
        self.features
    }

    pub fn get(&self, osm_id: i64) -> Option<&MapFeature> {
        self.by_id.get(&osm_id).map(|&i| &self.features[i])
    }

    pub fn bbox_of(&self, osm_id: i64) -> Option<BBox> {
        self.by_id.get(&osm_id).map(|&i| self.bboxes[i])
    }

    pub fn extent(&self) -> BBox {
        self.bboxes.iter().fold(BBox::empty(), |acc, b| acc.union(b))
    }

    pub fn index(&self) -> &RTree {
        &self.index
    }

    /// Features whose bounding box intersects `query`, ascending by id.
    pub fn query_bbox(&self, query: &BBox) -> Vec<&MapFeature> {
        let mut hits = Vec::new();
        self.index.query(query, &mut hits);
        hits.sort_unstable();
        hits.into_iter().map(|i| &self.features[i]).collect()
    }

    pub fn projection(&self) -> Option<&LocalProjection> {
        self.projection.as_ref()
    }

    /// The cached projection when `p` is within
    /// [`PROJECTION_RECENTER_DEG`] of its origin and the mode matches,
    /// otherwise a projection centered on `p`.
    pub fn projection_for(&self, p: &GeoPoint, mode: ProjectionMode) -> Result<LocalProjection> {
        match self.projection {
            Some(proj)
                if proj.mode() == mode
                    && proj.origin().srid() == p.srid()
                    && (proj.origin().lon() - p.lon()).abs() <= PROJECTION_RECENTER_DEG
                    && (proj.origin().lat() - p.lat()).abs() <= PROJECTION_RECENTER_DEG =>
            {
                Ok(proj)
            }
            _ => LocalProjection::new(*p, mode),
        }
    }

    /// Re-centres the cached projection on `p` if it has drifted too far.
    /// Returns whether a rebuild happened.
    pub fn recenter(&mut self, p: &GeoPoint, mode: ProjectionMode) -> Result<bool> {
        let next = self.projection_for(p, mode)?;
        let changed = self.projection != Some(next);
        self.projection = Some(next);
        Ok(changed)
    }
}

/// Features whose bounding box meets the zone's bounding box. A superset
/// of the features within the zone.
pub fn query_candidates<'a>(store: &'a FeatureStore, zone: &BufferZone) -> Vec<&'a MapFeature> {
    store.query_bbox(&zone.bbox())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::feature::Category;
    use crate::geometry::{PolygonShape, Ring};

    fn square_feature(id: i64, x: f64, y: f64, s: f64) -> MapFeature {
        let pts = [(x, y), (x + s, y), (x + s, y + s), (x, y + s)]
            .iter()
            .map(|&(a, b)| GeoPoint::new(a, b).unwrap())
            .collect();
        MapFeature::new(
            id,
            Category::Building,
            PolygonShape::simple(Ring::closing(pts).unwrap()),
        )
    }

    #[test]
    fn empty_store_has_no_candidates() {
        let store = FeatureStore::new(Vec::new()).unwrap();
        let zone = build_buffer(GeoPoint::new(0.0, 0.0).unwrap(), 0.01, 8).unwrap();
        assert!(query_candidates(&store, &zone).is_empty());
        assert!(store.projection().is_none());
    }

    #[test]
    fn feature_at_center_found_in_id_order() {
        let store = FeatureStore::new(vec![
            square_feature(5, 0.0, 0.0, 0.001),
            square_feature(2, 0.002, 0.0, 0.001),
            square_feature(9, 1.0, 1.0, 0.001),
        ])
        .unwrap();
        let zone = build_buffer(GeoPoint::new(0.0005, 0.0005).unwrap(), 0.01, 8).unwrap();
        let ids: Vec<i64> = query_candidates(&store, &zone).iter().map(|f| f.osm_id).collect();
        assert_eq!(ids, vec![2, 5]);
        assert_eq!(store.get(9).unwrap().osm_id, 9);
    }

    #[test]
    fn duplicate_ids_rejected() {
        let r = FeatureStore::new(vec![square_feature(1, 0.0, 0.0, 0.1), square_feature(1, 1.0, 0.0, 0.1)]);
        assert!(r.is_err());
    }

    #[test]
    fn projection_recenters_beyond_threshold() {
        let mut store = FeatureStore::new(vec![square_feature(1, 0.0, 52.0, 0.001)]).unwrap();
        let near = GeoPoint::new(0.05, 52.0).unwrap();
        let far = GeoPoint::new(0.5, 52.0).unwrap();
        let cached = *store.projection().unwrap();
        assert_eq!(store.projection_for(&near, ProjectionMode::Standard).unwrap(), cached);
        assert_eq!(
            store.projection_for(&far, ProjectionMode::Standard).unwrap().origin(),
            far
        );
        assert!(!store.recenter(&near, ProjectionMode::Standard).unwrap());
        assert!(store.recenter(&far, ProjectionMode::Standard).unwrap());
        assert_eq!(store.projection().unwrap().origin(), far);
    }

    #[test]
    fn extend_rebuilds_index() {
        let mut store = FeatureStore::new(vec![square_feature(1, 0.0, 0.0, 0.001)]).unwrap();
        store.extend(vec![square_feature(2, 0.0, 0.0, 0.001)]).unwrap();
        assert_eq!(store.len(), 2);
        assert_eq!(store.index().len(), 2);
        assert!(store.extend(vec![square_feature(2, 0.0, 0.0, 0.001)]).is_err());
    }
}
