//! Non-rectangular region geometry of the AV1 wedge mode.

mod mask;
mod shapes;
mod wedge;

pub use mask::{NrMask, Rect};
pub use shapes::{
    apply_chain, bounding_box, bounding_window, canonical_form, canonicalize, classify, classify_mask,
    is_rectangle_like, subdivide, CanonicalShape, ChainStep, Dihedral, RegionPlacement, ShapeInventory,
    ShapeType, Subdivision,
};
pub use wedge::{
    codebook, enumerate_regions, wedge_mask, BlockSize, Region, WedgeCode, WedgeDirection, WedgeSpec,
    WEDGES_PER_BLOCK,
};
