#ifndef COLLAPSEKIT_GALLERY_BUILDERS_HPP
#define COLLAPSEKIT_GALLERY_BUILDERS_HPP

#include "collapsekit/gallery.hpp"

namespace collapsekit::detail {

InverseSystem disk_system(const GallerySpec& spec);
InverseSystem hull_system(const GallerySpec& spec);
InverseSystem telescope_system(const GallerySpec& spec);
InverseSystem tree_ball_system(const GallerySpec& spec);
InverseSystem countable_tree_system(const GallerySpec& spec);
InverseSystem rn_shell_system(const GallerySpec& spec);

} // namespace collapsekit::detail

#endif
