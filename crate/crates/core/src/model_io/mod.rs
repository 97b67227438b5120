//! Model manifests, IQ sample files, and training-set directories.

mod dataset;
mod iqfile;
mod manifest;

pub use dataset::{read_training_set, write_training_set, DatasetMeta};
pub use iqfile::{decode_iq, encode_iq, read_iq, write_iq, IqFormat};
pub use manifest::{
    export_manifest, import_manifest, read_manifest, write_manifest, Metadata, ModelManifest, Node, Tensor,
    FORMAT_VERSION,
};
