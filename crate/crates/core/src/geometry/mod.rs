//! Box and pixel-mask geometry.

mod bbox;
mod mask;
mod nms;

pub use bbox::{anchor_decode, anchor_encode, expand_box, iou_box, BBox, BoxDelta};
pub use mask::{
    boundary_and_dilations, components_of, connected_components, disk_offsets, iou_mask, LabeledGrid, Mask,
};
pub use nms::{nms_boxes, nms_by, nms_masks};
