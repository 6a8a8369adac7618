use rstar::primitives::{GeomWithData, Rectangle};
use rstar::{RTree, AABB};

use super::BBox;

type Entry<T> = GeomWithData<Rectangle<[f64; 2]>, T>;

/// Bulk-loaded R-tree over bounding boxes. Queries return candidates whose
/// box touches the query box; callers refine with an exact predicate.
pub struct SpatialIndex<T> {
    tree: RTree<Entry<T>>,
}

impl<T> SpatialIndex<T> {
    pub fn build(entries: impl IntoIterator<Item = (T, BBox)>) -> Self {
        let items = entries
            .into_iter()
            .map(|(id, b)| {
                GeomWithData::new(
                    Rectangle::from_corners([b.min_lon, b.min_lat], [b.max_lon, b.max_lat]),
                    id,
                )
            })
            .collect();
        Self {
            tree: RTree::bulk_load(items),
        }
    }

    pub fn query(&self, b: &BBox) -> impl Iterator<Item = &T> {
        let env = AABB::from_corners([b.min_lon, b.min_lat], [b.max_lon, b.max_lat]);
        self.tree.locate_in_envelope_intersecting(&env).map(|e| &e.data)
    }

    pub fn len(&self) -> usize {
        self.tree.size()
    }

    pub fn is_empty(&self) -> bool {
        self.tree.size() == 0
    }
}
