//! Seeded synthetic data: coupled latent-variable datasets, multi-region
//! families, smooth pose families and rendered cartoon-face rasters.

mod coupled;
mod raster;

pub use coupled::{
    generate_coupled, generate_pose_family, generate_region_family, permuted_pairing,
    CoupledGroundTruth, GenerativeSpec, PoseFamilyDataset, PoseFamilySpec, RegionDatasets,
    RegionFamily,
};
pub use raster::{generate_rasters, SyntheticRasterSpec};
