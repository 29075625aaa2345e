#ifndef ICOSPH_H
#define ICOSPH_H

/* C interface to the icosph library: icosahedral spherical grids, hexagonal
 * convolution networks and equirectangular resampling. All functions return
 * 0 on success and a negative code on failure; ico_last_error() describes
 * the most recent failure on the calling thread. */

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#define ICO_OK 0
#define ICO_ERR_INVALID -1
#define ICO_ERR_IO -2
#define ICO_ERR_INTERNAL -3

typedef struct ico_mesh ico_mesh;
typedef struct ico_stensor ico_stensor;
typedef struct ico_net ico_net;

const char* ico_version(void);
const char* ico_last_error(void);

/* Strings returned through char** outputs are heap allocated; release them
 * with ico_string_free. */
void ico_string_free(char* s);

/* ---- mesh ---- */

/* Builds (or loads from ICO_CACHE_DIR) the level-r subdivision together with
 * its orientation blend maps. */
ico_mesh* ico_mesh_open(int level);
void ico_mesh_free(ico_mesh* m);

int ico_mesh_level(const ico_mesh* m);
int64_t ico_mesh_vertex_count(const ico_mesh* m);
int64_t ico_mesh_face_count(const ico_mesh* m);
int64_t ico_mesh_edge_count(const ico_mesh* m);
int ico_mesh_grid_width(const ico_mesh* m);

/* JSON summary: level, counts, component raster shape. */
int ico_mesh_info_json(const ico_mesh* m, char** json_out);

/* Writes the five blend-weight grids as a single-channel sphere tensor
 * file. */
int ico_mesh_write_alpha(const ico_mesh* m, const char* path);

/* ---- sphere tensors ---- */

ico_stensor* ico_stensor_create(int level, int channels);
ico_stensor* ico_stensor_read(const char* path);
int ico_stensor_write(const ico_stensor* t, const char* path);
void ico_stensor_free(ico_stensor* t);

int ico_stensor_level(const ico_stensor* t);
int ico_stensor_channels(const ico_stensor* t);

/* Raw component access; data is (channels, 2W, W) row-major, W = 2^level. */
float* ico_stensor_data(ico_stensor* t, int component);

/* ---- resampling ---- */

#define ICO_SAMPLE_BILINEAR 0
#define ICO_SAMPLE_NEAREST 1

/* Reads a binary PGM/PPM panorama (width must be twice the height) and
 * samples it onto the sphere. */
int ico_resample_to_sphere(int level, const char* image_path, int mode,
                           const char* out_path, char** json_out);

/* Renders a sphere tensor file back to an equirectangular PGM/PPM of the
 * given height (1 channel -> PGM, 3 -> PPM). */
int ico_resample_to_equirect(const char* sphere_path, int height,
                             const char* image_path, char** json_out);

/* Writes the five component rasters side by side (1-cell gaps) as an image;
 * 1- and 3-channel tensors only. */
int ico_export_unfolded(const char* sphere_path, const char* image_path);

/* ---- networks ---- */

/* arch: "hexrunet-c", "hexrunet" or "hexunet"; base selects the width of the
 * "hexrunet" ladder (8, 16 or 32) and is ignored otherwise. */
ico_net* ico_net_build(const char* arch, int base);
void ico_net_free(ico_net* n);

int64_t ico_net_param_count(const ico_net* n);

/* 1 if a reference total is on record for this configuration. */
int ico_net_published_total(const ico_net* n, int64_t* total_out);

/* Per-layer parameter table plus totals as JSON. */
int ico_net_audit_json(const ico_net* n, char** json_out);

/* Writes randomly initialized weights (normal, sigma 0.1) to a container
 * directory. */
int ico_net_init_weights(const ico_net* n, unsigned seed, const char* dir);

/* Loads weights, runs the forward pass on a sphere tensor file and writes
 * either a sphere tensor (segmentation nets) or a flat logits tensor
 * (classifier). json_out reports shapes and basic output statistics. */
int ico_net_forward(const ico_net* n, const char* weights_dir,
                    const char* input_path, const char* out_path,
                    char** json_out);

/* ---- weight transfer ---- */

/* One 3x3 perspective kernel (row-major p1..p9) to 7 hexagon weights. */
int ico_transfer_kernel(const double p[9], double w[7]);

/* Converts every (cout,cin,3,3) blob of a weight container to (cout,cin,7);
 * other blobs are copied unchanged. */
int ico_transfer_container(const char* in_dir, const char* out_dir);

/* ---- reference-oracle comparison ---- */

/* Runs the grid operators against the brute-force vertex-graph references on
 * random inputs at the given level and reports the error statistics as JSON.
 * pass_out is 1 when every deviation is within tolerance. */
int ico_oracle_check(int level, unsigned seed, int* pass_out, char** json_out);

#ifdef __cplusplus
}
#endif

#endif /* ICOSPH_H */
