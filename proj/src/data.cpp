#include "specsched/data.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include <png.h>

#include <nlohmann/json.hpp>

namespace fs = std::filesystem;

namespace specsched {

namespace {

// Skips whitespace and '#' comment lines in a PGM header.
int next_pgm_token(std::istream& in) {
    int c;
    while ((c = in.get()) != EOF) {
        if (c == '#') {
            while ((c = in.get()) != EOF && c != '\n') {
            }
        } else if (!std::isspace(c)) {
            in.unget();
            int value = 0;
            if (!(in >> value)) throw std::runtime_error("PGM: malformed header token");
            return value;
        }
    }
    throw std::runtime_error("PGM: truncated header");
}

}  // namespace

ImagePatch load_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    char magic[2] = {0, 0};
    in.read(magic, 2);
    if (magic[0] != 'P' || magic[1] != '5')
        throw std::runtime_error(path + ": not a P5 PGM file");
    const int width = next_pgm_token(in);
    const int height = next_pgm_token(in);
    const int maxval = next_pgm_token(in);
    if (width < 1 || height < 1) throw std::runtime_error(path + ": bad PGM dimensions");
    if (maxval != 255) throw std::runtime_error(path + ": only 8-bit PGM supported");
    in.get();  // single whitespace after maxval
    std::vector<unsigned char> raw(static_cast<std::size_t>(width) * height);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (static_cast<std::size_t>(in.gcount()) != raw.size())
        throw std::runtime_error(path + ": truncated PGM pixel data");
    ImagePatch img(width, height);
    for (std::size_t i = 0; i < raw.size(); ++i) img.pixels[i] = raw[i] / 255.0;
    return img;
}

ImagePatch load_png_gray8(const std::string& path) {
    std::FILE* fp = std::fopen(path.c_str(), "rb");
    if (!fp) throw std::runtime_error("cannot open " + path);
    unsigned char header[8];
    if (std::fread(header, 1, 8, fp) != 8 || png_sig_cmp(header, 0, 8)) {
        std::fclose(fp);
        throw std::runtime_error(path + ": not a PNG file");
    }
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        if (png) png_destroy_read_struct(&png, &info, nullptr);
        std::fclose(fp);
        throw std::runtime_error(path + ": libpng init failure");
    }
    std::vector<png_bytep> row_ptrs;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        std::fclose(fp);
        throw std::runtime_error(path + ": PNG decode error");
    }
    png_init_io(png, fp);
    png_set_sig_bytes(png, 8);
    png_read_info(png, info);

    const png_uint_32 width = png_get_image_width(png, info);
    const png_uint_32 height = png_get_image_height(png, info);
    const int color = png_get_color_type(png, info);
    const int depth = png_get_bit_depth(png, info);
    if (color != PNG_COLOR_TYPE_GRAY || depth != 8) {
        png_destroy_read_struct(&png, &info, nullptr);
        std::fclose(fp);
        throw std::runtime_error(path + ": only 8-bit grayscale PNG supported");
    }

    std::vector<unsigned char> raw(static_cast<std::size_t>(width) * height);
    row_ptrs.resize(height);
    for (png_uint_32 r = 0; r < height; ++r)
        row_ptrs[r] = raw.data() + static_cast<std::size_t>(r) * width;
    png_read_image(png, row_ptrs.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    std::fclose(fp);

    ImagePatch img(static_cast<int>(width), static_cast<int>(height));
    for (std::size_t i = 0; i < raw.size(); ++i) img.pixels[i] = raw[i] / 255.0;
    return img;
}

ImageDataset load_images(const std::string& dir) {
    if (!fs::is_directory(dir)) throw std::runtime_error(dir + ": not a readable directory");
    std::vector<std::string> files;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file()) files.push_back(entry.path().string());
    std::sort(files.begin(), files.end());

    ImageDataset ds;
    for (const auto& f : files) {
        const std::string ext = fs::path(f).extension().string();
        try {
            if (ext == ".pgm") {
                ds.images.push_back(load_pgm(f));
            } else if (ext == ".png") {
                ds.images.push_back(load_png_gray8(f));
            } else {
                continue;
            }
            ds.paths.push_back(f);
        } catch (const std::exception& e) {
            if (std::string(e.what()).find("grayscale") != std::string::npos)
                throw;  // wrong pixel format is a hard error naming the file
            std::cerr << "warning: skipping " << f << ": " << e.what() << "\n";
            ds.skipped.push_back(f);
        }
    }
    if (ds.images.empty())
        throw std::runtime_error(dir + ": no decodable PGM/PNG images found");
    return ds;
}

ImagePatch dihedral(const ImagePatch& p, int which) {
    if (p.width != p.height) throw std::invalid_argument("dihedral: patch must be square");
    if (which < 0 || which > 7) throw std::invalid_argument("dihedral: index must be in [0,8)");
    const int n = p.width;
    const int quarter_turns = which & 3;
    const bool flip = which & 4;
    ImagePatch out(n, n);
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) {
            int sr = r, sc = c;
            for (int q = 0; q < quarter_turns; ++q) {
                const int nr = n - 1 - sc;
                sc = sr;
                sr = nr;
            }
            if (flip) sc = n - 1 - sc;
            out.at(r, c) = p.at(sr, sc);
        }
    }
    return out;
}

PatchSet extract_patches(const ImageDataset& ds, int patch_size, int count, AugmentFlags augment,
                         RandomStream& rng) {
    if (patch_size < 1) throw std::invalid_argument("extract_patches: bad patch size");
    if (count < 1) throw std::invalid_argument("extract_patches: count must be >= 1");
    for (std::size_t i = 0; i < ds.images.size(); ++i)
        if (ds.images[i].width < patch_size || ds.images[i].height < patch_size)
            throw std::invalid_argument("extract_patches: image " + ds.paths[i] +
                                        " is smaller than the patch size");

    PatchSet ps;
    ps.patch_size = patch_size;
    ps.augment = augment;
    ps.patches.reserve(count);
    const int n_augment = (augment.flip || augment.rot90) ? 8 : 1;
    for (int k = 0; k < count; ++k) {
        const auto& img = ds.images[rng.below(ds.images.size())];
        const auto r0 = static_cast<int>(rng.below(img.height - patch_size + 1));
        const auto c0 = static_cast<int>(rng.below(img.width - patch_size + 1));
        ImagePatch patch(patch_size, patch_size);
        for (int r = 0; r < patch_size; ++r)
            for (int c = 0; c < patch_size; ++c) patch.at(r, c) = img.at(r0 + r, c0 + c);
        if (n_augment > 1) patch = dihedral(patch, static_cast<int>(rng.below(8)));
        ps.patches.push_back(std::move(patch));
    }
    return ps;
}

Moments moments(const std::vector<ImagePatch>& patches) {
    if (patches.empty()) throw std::invalid_argument("moments: no patches");
    double sum = 0.0, sum_sq = 0.0;
    std::size_t n = 0;
    for (const auto& p : patches) {
        for (double v : p.pixels) {
            sum += v;
            sum_sq += v * v;
        }
        n += p.size();
    }
    if (n == 0) throw std::invalid_argument("moments: empty patches");
    return {sum / static_cast<double>(n), sum_sq / static_cast<double>(n)};
}

void save_patch_cache(const std::string& path, const PatchSet& ps) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write patch cache: " + path);
    nlohmann::json header = {{"magic", "specsched-patches-v1"},
                             {"count", ps.patches.size()},
                             {"patch_size", ps.patch_size},
                             {"flip", ps.augment.flip},
                             {"rot90", ps.augment.rot90}};
    out << header.dump() << "\n";
    static_assert(std::endian::native == std::endian::little,
                  "patch cache assumes a little-endian host");
    for (const auto& p : ps.patches) {
        for (double v : p.pixels) {
            const float f = static_cast<float>(v);
            out.write(reinterpret_cast<const char*>(&f), sizeof(f));
        }
    }
}

PatchSet load_patch_cache(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read patch cache: " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(path + ": missing cache header");
    const auto header = nlohmann::json::parse(line);
    if (header.at("magic").get<std::string>() != "specsched-patches-v1")
        throw std::runtime_error(path + ": not a patch cache file");
    PatchSet ps;
    ps.patch_size = header.at("patch_size").get<int>();
    ps.augment.flip = header.at("flip").get<bool>();
    ps.augment.rot90 = header.at("rot90").get<bool>();
    const auto count = header.at("count").get<std::size_t>();
    const std::size_t px = static_cast<std::size_t>(ps.patch_size) * ps.patch_size;
    ps.patches.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        ImagePatch p(ps.patch_size, ps.patch_size);
        for (std::size_t j = 0; j < px; ++j) {
            float f;
            in.read(reinterpret_cast<char*>(&f), sizeof(f));
            if (!in) throw std::runtime_error(path + ": truncated patch cache");
            p.pixels[j] = f;
        }
        ps.patches.push_back(std::move(p));
    }
    return ps;
}

}  // namespace specsched
