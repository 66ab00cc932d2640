#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "specsched/noise.hpp"
#include "specsched/rng.hpp"

namespace specsched {

struct ImageDataset {
    std::vector<ImagePatch> images;       // grayscale, pixels in [0,1]
    std::vector<std::string> paths;       // matching source files
    std::vector<std::string> skipped;     // unreadable files, by name
};

struct AugmentFlags {
    bool flip = false;
    bool rot90 = false;
};

struct PatchSet {
    std::vector<ImagePatch> patches;
    int patch_size = 40;
    AugmentFlags augment;
};

// Loads 8-bit PGM (P5) and 8-bit grayscale PNG from a directory in
// lexicographic file order; values map to [0,1] as v/255. Unreadable files
// are skipped and reported in `skipped`; zero decodable images is an error,
// as is a non-grayscale PNG.
ImageDataset load_images(const std::string& dir);

ImagePatch load_pgm(const std::string& path);
ImagePatch load_png_gray8(const std::string& path);

// Uniformly random patch anchors, optionally with the 8 dihedral
// augmentations equiprobable. Anchor math is integer-only, so results are
// bit-identical across platforms for a fixed seed.
PatchSet extract_patches(const ImageDataset& ds, int patch_size, int count, AugmentFlags augment,
                         RandomStream& rng);

// One of the 8 dihedral transforms of a square patch (0 = identity,
// bit 0..1 = quarter turns, bit 2 = horizontal flip first).
ImagePatch dihedral(const ImagePatch& p, int which);

struct Moments {
    double m1 = 0.0;  // mean pixel
    double S2 = 0.0;  // mean squared pixel
};

Moments moments(const std::vector<ImagePatch>& patches);

// Patch cache: one JSON header line, then raw little-endian float32 pixels.
void save_patch_cache(const std::string& path, const PatchSet& ps);
PatchSet load_patch_cache(const std::string& path);

}  // namespace specsched
