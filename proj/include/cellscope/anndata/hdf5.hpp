#ifndef CELLSCOPE_ANNDATA_HDF5_HPP
#define CELLSCOPE_ANNDATA_HDF5_HPP

#include "../error.hpp"

#include <hdf5.h>

#include <cstdint>
#include <cstring>
#include <optional>
#include <string>
#include <utility>
#include <vector>

/**
 * @file hdf5.hpp
 *
 * @brief Thin RAII layer over the HDF5 C API with the handful of typed reads
 * the h5ad parser needs. HDF5 performs the numeric width conversion, so every
 * numeric read lands in a native 64-bit buffer.
 */

namespace cellscope::anndata::h5 {

/**
 * Owning wrapper for any HDF5 identifier; the close function is picked from
 * the identifier type at destruction.
 */
class Handle {
public:
    Handle() = default;
    explicit Handle(hid_t id) : id_(id) {}
    Handle(const Handle&) = delete;
    Handle& operator=(const Handle&) = delete;
    Handle(Handle&& other) noexcept : id_(std::exchange(other.id_, H5I_INVALID_HID)) {}
    Handle& operator=(Handle&& other) noexcept {
        if (this != &other) {
            reset();
            id_ = std::exchange(other.id_, H5I_INVALID_HID);
        }
        return *this;
    }
    ~Handle() { reset(); }

    hid_t get() const { return id_; }
    explicit operator bool() const { return id_ >= 0; }

    void reset() {
        if (id_ < 0) {
            return;
        }
        switch (H5Iget_type(id_)) {
            case H5I_FILE: H5Fclose(id_); break;
            case H5I_GROUP: H5Gclose(id_); break;
            case H5I_DATASET: H5Dclose(id_); break;
            case H5I_ATTR: H5Aclose(id_); break;
            case H5I_DATATYPE: H5Tclose(id_); break;
            case H5I_DATASPACE: H5Sclose(id_); break;
            default: H5Oclose(id_); break;
        }
        id_ = H5I_INVALID_HID;
    }

private:
    hid_t id_ = H5I_INVALID_HID;
};

inline Handle checked(hid_t id, const std::string& what) {
    if (id < 0) {
        throw Error(ErrorKind::UnsupportedEncoding, "HDF5 failure: " + what);
    }
    return Handle(id);
}

/// Silence the HDF5 automatic error stack printer; failures surface as exceptions.
inline void silence_errors() {
    H5Eset_auto2(H5E_DEFAULT, nullptr, nullptr);
}

enum class NodeKind { Missing, Group, Dataset, Other };

inline NodeKind node_kind(hid_t parent, const std::string& name) {
    if (H5Lexists(parent, name.c_str(), H5P_DEFAULT) <= 0) {
        return NodeKind::Missing;
    }
    H5O_info_t info;
#if H5_VERSION_GE(1, 12, 0)
    if (H5Oget_info_by_name3(parent, name.c_str(), &info, H5O_INFO_BASIC, H5P_DEFAULT) < 0) {
#else
    if (H5Oget_info_by_name2(parent, name.c_str(), &info, H5O_INFO_BASIC, H5P_DEFAULT) < 0) {
#endif
        return NodeKind::Missing;
    }
    switch (info.type) {
        case H5O_TYPE_GROUP: return NodeKind::Group;
        case H5O_TYPE_DATASET: return NodeKind::Dataset;
        default: return NodeKind::Other;
    }
}

inline Handle open_group(hid_t parent, const std::string& name) {
    return checked(H5Gopen2(parent, name.c_str(), H5P_DEFAULT), "open group " + name);
}

inline Handle open_dataset(hid_t parent, const std::string& name) {
    return checked(H5Dopen2(parent, name.c_str(), H5P_DEFAULT), "open dataset " + name);
}

/// Names of the direct children of a group, in HDF5 name order.
inline std::vector<std::string> child_names(hid_t group) {
    H5G_info_t info;
    if (H5Gget_info(group, &info) < 0) {
        throw Error(ErrorKind::UnsupportedEncoding, "cannot list group members");
    }
    std::vector<std::string> out;
    for (hsize_t i = 0; i < info.nlinks; ++i) {
        auto len = H5Lget_name_by_idx(group, ".", H5_INDEX_NAME, H5_ITER_INC, i, nullptr, 0, H5P_DEFAULT);
        if (len < 0) {
            throw Error(ErrorKind::UnsupportedEncoding, "cannot read group member name");
        }
        std::string name(static_cast<std::size_t>(len), '\0');
        H5Lget_name_by_idx(group, ".", H5_INDEX_NAME, H5_ITER_INC, i, name.data(), name.size() + 1, H5P_DEFAULT);
        out.push_back(std::move(name));
    }
    return out;
}

inline std::vector<hsize_t> extent(hid_t space) {
    const int rank = H5Sget_simple_extent_ndims(space);
    if (rank < 0) {
        throw Error(ErrorKind::UnsupportedEncoding, "cannot query dataspace rank");
    }
    std::vector<hsize_t> dims(static_cast<std::size_t>(rank));
    if (rank > 0) {
        H5Sget_simple_extent_dims(space, dims.data(), nullptr);
    }
    return dims;
}

inline std::vector<hsize_t> dataset_shape(hid_t dset) {
    Handle space = checked(H5Dget_space(dset), "dataset space");
    return extent(space.get());
}

inline H5T_class_t dataset_class(hid_t dset) {
    Handle type = checked(H5Dget_type(dset), "dataset type");
    return H5Tget_class(type.get());
}

inline std::size_t element_count(const std::vector<hsize_t>& dims) {
    std::size_t n = 1;
    for (auto d : dims) {
        n *= static_cast<std::size_t>(d);
    }
    return n;
}

/**
 * Decode `count` strings stored with file type `ftype` by the given reader,
 * which is either H5Dread or H5Aread bound to the right object.
 */
template<class Reader>
std::vector<std::string> decode_strings(hid_t ftype, std::size_t count, Reader&& read) {
    std::vector<std::string> out;
    out.reserve(count);
    if (H5Tis_variable_str(ftype) > 0) {
        Handle mtype = checked(H5Tcopy(H5T_C_S1), "string type");
        H5Tset_size(mtype.get(), H5T_VARIABLE);
        H5Tset_cset(mtype.get(), H5Tget_cset(ftype));
        std::vector<char*> buffer(count, nullptr);
        if (count > 0 && read(mtype.get(), buffer.data()) < 0) {
            throw Error(ErrorKind::UnsupportedEncoding, "cannot read variable-length strings");
        }
        for (auto* s : buffer) {
            out.emplace_back(s ? s : "");
        }
        if (count > 0) {
            Handle space = checked(H5Screate_simple(1, std::vector<hsize_t>{count}.data(), nullptr), "string space");
            H5Dvlen_reclaim(mtype.get(), space.get(), H5P_DEFAULT, buffer.data());
        }
        return out;
    }

    const std::size_t width = H5Tget_size(ftype);
    Handle mtype = checked(H5Tcopy(H5T_C_S1), "string type");
    H5Tset_size(mtype.get(), width);
    H5Tset_strpad(mtype.get(), H5T_STR_NULLPAD);
    H5Tset_cset(mtype.get(), H5Tget_cset(ftype));
    std::vector<char> buffer(width * count);
    if (count > 0 && read(mtype.get(), buffer.data()) < 0) {
        throw Error(ErrorKind::UnsupportedEncoding, "cannot read fixed-length strings");
    }
    for (std::size_t i = 0; i < count; ++i) {
        const char* start = buffer.data() + i * width;
        out.emplace_back(start, strnlen(start, width));
    }
    return out;
}

inline std::vector<std::string> read_strings(hid_t dset) {
    Handle ftype = checked(H5Dget_type(dset), "dataset type");
    if (H5Tget_class(ftype.get()) != H5T_STRING) {
        throw Error(ErrorKind::UnsupportedEncoding, "dataset is not a string array");
    }
    const auto count = element_count(dataset_shape(dset));
    return decode_strings(ftype.get(), count, [&](hid_t mtype, void* buf) {
        return H5Dread(dset, mtype, H5S_ALL, H5S_ALL, H5P_DEFAULT, buf);
    });
}

template<typename T>
hid_t native_type();
template<> inline hid_t native_type<double>() { return H5T_NATIVE_DOUBLE; }
template<> inline hid_t native_type<float>() { return H5T_NATIVE_FLOAT; }
template<> inline hid_t native_type<std::int64_t>() { return H5T_NATIVE_INT64; }
template<> inline hid_t native_type<std::uint64_t>() { return H5T_NATIVE_UINT64; }
template<> inline hid_t native_type<std::int32_t>() { return H5T_NATIVE_INT32; }

/**
 * Read a whole numeric dataset, letting HDF5 convert from the on-disk type.
 */
template<typename T>
std::vector<T> read_numeric(hid_t dset) {
    const auto cls = dataset_class(dset);
    if (cls != H5T_INTEGER && cls != H5T_FLOAT) {
        throw Error(ErrorKind::UnsupportedEncoding, "dataset is not numeric");
    }
    std::vector<T> out(element_count(dataset_shape(dset)));
    if (!out.empty() && H5Dread(dset, native_type<T>(), H5S_ALL, H5S_ALL, H5P_DEFAULT, out.data()) < 0) {
        throw Error(ErrorKind::UnsupportedEncoding, "cannot read numeric dataset");
    }
    return out;
}

inline bool has_attribute(hid_t obj, const std::string& name) {
    return H5Aexists(obj, name.c_str()) > 0;
}

/// Read a string or string-array attribute; empty when the attribute is absent.
inline std::vector<std::string> read_string_attribute(hid_t obj, const std::string& name) {
    if (!has_attribute(obj, name)) {
        return {};
    }
    Handle attr = checked(H5Aopen(obj, name.c_str(), H5P_DEFAULT), "open attribute " + name);
    Handle ftype = checked(H5Aget_type(attr.get()), "attribute type");
    if (H5Tget_class(ftype.get()) != H5T_STRING) {
        throw Error(ErrorKind::UnsupportedEncoding, "attribute '" + name + "' is not a string");
    }
    Handle space = checked(H5Aget_space(attr.get()), "attribute space");
    const auto count = element_count(extent(space.get()));
    return decode_strings(ftype.get(), count, [&](hid_t mtype, void* buf) {
        return H5Aread(attr.get(), mtype, buf);
    });
}

inline std::optional<std::string> read_scalar_string_attribute(hid_t obj, const std::string& name) {
    auto values = read_string_attribute(obj, name);
    if (values.empty()) {
        return std::nullopt;
    }
    return values.front();
}

/// Read an integer-array attribute such as the sparse `shape`.
inline std::vector<std::int64_t> read_integer_attribute(hid_t obj, const std::string& name) {
    Handle attr = checked(H5Aopen(obj, name.c_str(), H5P_DEFAULT), "open attribute " + name);
    Handle ftype = checked(H5Aget_type(attr.get()), "attribute type");
    if (H5Tget_class(ftype.get()) != H5T_INTEGER) {
        throw Error(ErrorKind::UnsupportedEncoding, "attribute '" + name + "' is not an integer array");
    }
    Handle space = checked(H5Aget_space(attr.get()), "attribute space");
    std::vector<std::int64_t> out(element_count(extent(space.get())));
    if (!out.empty() && H5Aread(attr.get(), H5T_NATIVE_INT64, out.data()) < 0) {
        throw Error(ErrorKind::UnsupportedEncoding, "cannot read attribute " + name);
    }
    return out;
}

inline bool attribute_is_reference(hid_t obj, const std::string& name) {
    Handle attr = checked(H5Aopen(obj, name.c_str(), H5P_DEFAULT), "open attribute " + name);
    Handle ftype = checked(H5Aget_type(attr.get()), "attribute type");
    return H5Tget_class(ftype.get()) == H5T_REFERENCE;
}

/// Follow a scalar object-reference attribute to the dataset it names.
inline Handle dereference_attribute(hid_t obj, const std::string& name) {
    Handle attr = checked(H5Aopen(obj, name.c_str(), H5P_DEFAULT), "open attribute " + name);
    hobj_ref_t ref;
    if (H5Aread(attr.get(), H5T_STD_REF_OBJ, &ref) < 0) {
        throw Error(ErrorKind::UnsupportedEncoding, "cannot read reference attribute " + name);
    }
    return checked(H5Rdereference2(obj, H5P_DEFAULT, H5R_OBJECT, &ref), "dereference " + name);
}

}

#endif
