use alloc::vec;
use alloc::vec::Vec;

use super::BinaryImage;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Connectivity {
    Four,
    #[default]
    Eight,
}

/// One connected set of foreground pixels.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConnectedComponent {
    /// 1-based, in raster order of each component's first pixel.
    pub label: u32,
    /// Pixel coordinates `(x, y)` in raster order.
    pub pixels: Vec<(usize, usize)>,
    /// `(min_x, min_y, max_x, max_y)`, inclusive.
    pub bounding_box: (usize, usize, usize, usize),
}

impl ConnectedComponent {
    /// Builds a component from an arbitrary non-empty pixel list; the list is
    /// sorted into raster order.
    pub fn from_pixels(label: u32, mut pixels: Vec<(usize, usize)>) -> Self {
        assert!(!pixels.is_empty(), "component must contain pixels");
        pixels.sort_unstable_by_key(|&(x, y)| (y, x));
        pixels.dedup();
        let mut bb = (usize::MAX, usize::MAX, 0, 0);
        for &(x, y) in &pixels {
            bb.0 = bb.0.min(x);
            bb.1 = bb.1.min(y);
            bb.2 = bb.2.max(x);
            bb.3 = bb.3.max(y);
        }
        Self {
            label,
            pixels,
            bounding_box: bb,
        }
    }

    pub fn area(&self) -> usize {
        self.pixels.len()
    }

    /// Top-most, then left-most pixel.
    pub fn first_pixel(&self) -> (usize, usize) {
        self.pixels[0]
    }

    /// Renders the component alone onto a blank canvas of the given size.
    pub fn to_image(&self, width: usize, height: usize) -> BinaryImage {
        let mut img = BinaryImage::new(width, height).expect("non-zero canvas");
        for &(x, y) in &self.pixels {
            img.set(x, y, true);
        }
        img
    }
}

fn find(parent: &mut [u32], mut i: u32) -> u32 {
    while parent[i as usize] != i {
        parent[i as usize] = parent[parent[i as usize] as usize];
        i = parent[i as usize];
    }
    i
}

fn union(parent: &mut [u32], a: u32, b: u32) {
    let (ra, rb) = (find(parent, a), find(parent, b));
    if ra != rb {
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        parent[hi as usize] = lo;
    }
}

/// Two-pass connected-component labeling with union-find.
///
/// Components are returned ordered by label; labels follow the raster-scan
/// order of each component's first pixel, so the output is deterministic.
pub fn label_components(img: &BinaryImage, connectivity: Connectivity) -> Vec<ConnectedComponent> {
    let (w, h) = (img.width(), img.height());
    let mut labels = vec![0u32; w * h];
    // parent[0] is unused so provisional labels can start at 1
    let mut parent: Vec<u32> = vec![0];

    let prior: &[(isize, isize)] = match connectivity {
        Connectivity::Four => &[(-1, 0), (0, -1)],
        Connectivity::Eight => &[(-1, 0), (-1, -1), (0, -1), (1, -1)],
    };

    for y in 0..h {
        for x in 0..w {
            if !img.get(x, y) {
                continue;
            }
            let mut current = 0u32;
            for &(dx, dy) in prior {
                let (nx, ny) = (x as isize + dx, y as isize + dy);
                if !img.get_signed(nx, ny) {
                    continue;
                }
                let l = labels[ny as usize * w + nx as usize];
                if current == 0 {
                    current = l;
                } else if l != current {
                    union(&mut parent, current, l);
                }
            }
            if current == 0 {
                current = parent.len() as u32;
                parent.push(current);
            }
            labels[y * w + x] = current;
        }
    }

    // second pass: number components by the raster position of their first pixel
    let mut final_label = vec![0u32; parent.len()];
    let mut components: Vec<ConnectedComponent> = Vec::new();
    for y in 0..h {
        for x in 0..w {
            let l = labels[y * w + x];
            if l == 0 {
                continue;
            }
            let root = find(&mut parent, l) as usize;
            if final_label[root] == 0 {
                components.push(ConnectedComponent {
                    label: components.len() as u32 + 1,
                    pixels: Vec::new(),
                    bounding_box: (x, y, x, y),
                });
                final_label[root] = components.len() as u32;
            }
            let c = &mut components[final_label[root] as usize - 1];
            c.pixels.push((x, y));
            let bb = &mut c.bounding_box;
            bb.0 = bb.0.min(x);
            bb.2 = bb.2.max(x);
            bb.3 = y;
        }
    }
    components
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::collections::VecDeque;
    use proptest::prelude::*;

    /// Flood-fill reference labeling used as an oracle.
    fn flood_labels(img: &BinaryImage, conn: Connectivity) -> Vec<Vec<(usize, usize)>> {
        let (w, h) = (img.width(), img.height());
        let mut seen = vec![false; w * h];
        let mut out = Vec::new();
        let nbrs: &[(isize, isize)] = match conn {
            Connectivity::Four => &crate::raster::NEIGHBORS_4,
            Connectivity::Eight => &crate::raster::NEIGHBORS_8,
        };
        for (sx, sy) in img.foreground() {
            if seen[sy * w + sx] {
                continue;
            }
            let mut comp = Vec::new();
            let mut q = VecDeque::from([(sx, sy)]);
            seen[sy * w + sx] = true;
            while let Some((x, y)) = q.pop_front() {
                comp.push((x, y));
                for &(dx, dy) in nbrs {
                    let (nx, ny) = (x as isize + dx, y as isize + dy);
                    if img.get_signed(nx, ny) && !seen[ny as usize * w + nx as usize] {
                        seen[ny as usize * w + nx as usize] = true;
                        q.push_back((nx as usize, ny as usize));
                    }
                }
            }
            comp.sort_unstable_by_key(|&(x, y)| (y, x));
            out.push(comp);
        }
        let _ = h;
        out
    }

    #[test]
    fn empty_image_has_no_components() {
        let img = BinaryImage::new(5, 5).unwrap();
        assert!(label_components(&img, Connectivity::Eight).is_empty());
    }

    #[test]
    fn two_squares() {
        let img = BinaryImage::from_ascii(&[
            "###....", //
            "###.###", "###.###", "....###",
        ])
        .unwrap();
        let cc = label_components(&img, Connectivity::Eight);
        assert_eq!(cc.len(), 2);
        assert_eq!(cc[0].area(), 9);
        assert_eq!(cc[1].area(), 9);
        assert_eq!(cc[0].bounding_box, (0, 0, 2, 2));
        assert_eq!(cc[1].bounding_box, (4, 1, 6, 3));
    }

    #[test]
    fn diagonal_pair_depends_on_connectivity() {
        let img = BinaryImage::from_ascii(&["#.", ".#"]).unwrap();
        assert_eq!(label_components(&img, Connectivity::Eight).len(), 1);
        assert_eq!(label_components(&img, Connectivity::Four).len(), 2);
    }

    #[test]
    fn u_shape_merges_late() {
        // the two arms get different provisional labels and merge on the last row
        let img = BinaryImage::from_ascii(&["#..#", "#..#", "####"]).unwrap();
        let cc = label_components(&img, Connectivity::Four);
        assert_eq!(cc.len(), 1);
        assert_eq!(cc[0].area(), 8);
    }

    fn arb_image() -> impl Strategy<Value = BinaryImage> {
        (1usize..12, 1usize..12).prop_flat_map(|(w, h)| {
            proptest::collection::vec(proptest::bool::weighted(0.45), w * h)
                .prop_map(move |d| BinaryImage::from_pixels(w, h, d).unwrap())
        })
    }

    proptest! {
        #[test]
        fn matches_flood_fill(img in arb_image(), eight in any::<bool>()) {
            let conn = if eight { Connectivity::Eight } else { Connectivity::Four };
            let got: Vec<_> = label_components(&img, conn).into_iter().map(|c| c.pixels).collect();
            prop_assert_eq!(got, flood_labels(&img, conn));
        }

        #[test]
        fn areas_sum_to_foreground(img in arb_image()) {
            let cc = label_components(&img, Connectivity::Eight);
            prop_assert_eq!(cc.iter().map(|c| c.area()).sum::<usize>(), img.count_foreground());
            for (i, c) in cc.iter().enumerate() {
                prop_assert_eq!(c.label as usize, i + 1);
                let fresh = ConnectedComponent::from_pixels(c.label, c.pixels.clone());
                prop_assert_eq!(&fresh, c);
            }
        }
    }
}
