//! Procedural 4D ground truth: animated Gaussian scenes, the 48-camera rig,
//! multiview clip rendering and the motion filter.

mod clips;
pub mod fixtures;
mod rig;
mod scene;

pub use clips::{
    filter_manifest, mean_abs_diff, motion_score, render_clips, scene_id, ClipRecord, ClipSource,
    DatasetManifest, DatasetOptions, DiskDataset, MemoryDataset, RenderSettings, RenderedScene,
    MANIFEST_FILE, MANIFEST_VERSION, MOTION_FPS, MOTION_THRESHOLD,
};
pub use rig::{
    build_rig, build_rig_at, orthogonal_fixed, DEFAULT_RESOLUTION, FIXED_CAMERAS, RANDOM_CAMERAS,
    RANDOM_ELEVATION,
};
pub use scene::{
    generate_scene, ClusterShape, ClusterTemplate, MotionTrack, ScenePart, SceneSpec, TEMPLATE_COUNT,
    TEMPLATE_NAMES,
};
