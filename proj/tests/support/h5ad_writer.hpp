#ifndef CELLSCOPE_TESTS_H5AD_WRITER_HPP
#define CELLSCOPE_TESTS_H5AD_WRITER_HPP

// Minimal AnnData writer for test fixtures, written directly against the
// HDF5 C API so it shares no code with the reader under test.

#include <hdf5.h>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace cellscope_test {

class H5adWriter {
public:
    explicit H5adWriter(const std::filesystem::path& path) {
        H5Eset_auto2(H5E_DEFAULT, nullptr, nullptr);
        file_ = H5Fcreate(path.c_str(), H5F_ACC_TRUNC, H5P_DEFAULT, H5P_DEFAULT);
        if (file_ < 0) {
            throw std::runtime_error("cannot create " + path.string());
        }
    }
    H5adWriter(const H5adWriter&) = delete;
    H5adWriter& operator=(const H5adWriter&) = delete;

    ~H5adWriter() {
        for (auto& [name, columns] : frames_) {
            hid_t g = group(name);
            string_array_attr(g, "column-order", columns);
            H5Gclose(g);
        }
        H5Fclose(file_);
    }

    // ---- X ----

    void csr(std::int64_t n_obs, std::int64_t n_var, const std::vector<std::int64_t>& indptr, const std::vector<std::int32_t>& indices, const std::vector<float>& data, const std::string& encoding = "csr_matrix") {
        sparse(n_obs, n_var, indptr, indices, data, encoding);
    }

    void csc(std::int64_t n_obs, std::int64_t n_var, const std::vector<std::int64_t>& indptr, const std::vector<std::int32_t>& indices, const std::vector<float>& data) {
        sparse(n_obs, n_var, indptr, indices, data, "csc_matrix");
    }

    /// Pre-0.7 anndata: `h5sparse_format` and `h5sparse_shape` attributes.
    void legacy_csr(std::int64_t n_obs, std::int64_t n_var, const std::vector<std::int64_t>& indptr, const std::vector<std::int32_t>& indices, const std::vector<float>& data) {
        hid_t g = H5Gcreate2(file_, "X", H5P_DEFAULT, H5P_DEFAULT, H5P_DEFAULT);
        string_attr(g, "h5sparse_format", "csr");
        int64_attr(g, "h5sparse_shape", {n_obs, n_var});
        dataset(g, "data", H5T_NATIVE_FLOAT, H5T_IEEE_F32LE, data.data(), data.size());
        dataset(g, "indices", H5T_NATIVE_INT32, H5T_STD_I32LE, indices.data(), indices.size());
        dataset(g, "indptr", H5T_NATIVE_INT64, H5T_STD_I64LE, indptr.data(), indptr.size());
        H5Gclose(g);
    }

    void dense(std::int64_t n_obs, std::int64_t n_var, const std::vector<double>& values) {
        hsize_t dims[2] = {static_cast<hsize_t>(n_obs), static_cast<hsize_t>(n_var)};
        hid_t space = H5Screate_simple(2, dims, nullptr);
        hid_t d = H5Dcreate2(file_, "X", H5T_IEEE_F64LE, space, H5P_DEFAULT, H5P_DEFAULT, H5P_DEFAULT);
        H5Dwrite(d, H5T_NATIVE_DOUBLE, H5S_ALL, H5S_ALL, H5P_DEFAULT, values.data());
        string_attr(d, "encoding-type", "array");
        string_attr(d, "encoding-version", "0.2.0");
        H5Dclose(d);
        H5Sclose(space);
    }

    // ---- dataframes ----

    void index(const std::string& frame, const std::vector<std::string>& names) {
        hid_t g = group(frame);
        string_dataset(g, "_index", names);
        string_attr(g, "_index", "_index");
        H5Gclose(g);
    }

    /// Declare a dataframe with no rows of its own beyond an index.
    void empty_frame(const std::string& frame) {
        H5Gclose(group(frame));
    }

    void categorical(const std::string& frame, const std::string& name, const std::vector<std::string>& categories, const std::vector<std::int32_t>& codes, const std::string& version = "0.2.0") {
        hid_t g = group(frame);
        hid_t c = H5Gcreate2(g, name.c_str(), H5P_DEFAULT, H5P_DEFAULT, H5P_DEFAULT);
        string_attr(c, "encoding-type", "categorical");
        string_attr(c, "encoding-version", version);
        string_dataset(c, "categories", categories);
        std::int32_t largest = -1;
        for (auto code : codes) {
            largest = std::max(largest, code);
        }
        if (largest < 127) {
            std::vector<std::int8_t> small(codes.begin(), codes.end());
            dataset(c, "codes", H5T_NATIVE_INT8, H5T_STD_I8LE, small.data(), small.size());
        } else {
            dataset(c, "codes", H5T_NATIVE_INT32, H5T_STD_I32LE, codes.data(), codes.size());
        }
        H5Gclose(c);
        H5Gclose(g);
        frames_[frame].push_back(name);
    }

    /// anndata 0.7 layout: codes dataset with an object reference to __categories/<name>.
    void legacy_categorical(const std::string& frame, const std::string& name, const std::vector<std::string>& categories, const std::vector<std::int32_t>& codes) {
        hid_t g = group(frame);
        hid_t cats = H5Lexists(g, "__categories", H5P_DEFAULT) > 0 ? H5Gopen2(g, "__categories", H5P_DEFAULT) : H5Gcreate2(g, "__categories", H5P_DEFAULT, H5P_DEFAULT, H5P_DEFAULT);
        string_dataset(cats, name, categories);
        hid_t d = dataset(g, name, H5T_NATIVE_INT32, H5T_STD_I32LE, codes.data(), codes.size(), false);
        hobj_ref_t ref;
        H5Rcreate(&ref, cats, name.c_str(), H5R_OBJECT, -1);
        hid_t space = H5Screate(H5S_SCALAR);
        hid_t a = H5Acreate2(d, "categories", H5T_STD_REF_OBJ, space, H5P_DEFAULT, H5P_DEFAULT);
        H5Awrite(a, H5T_STD_REF_OBJ, &ref);
        H5Aclose(a);
        H5Sclose(space);
        H5Dclose(d);
        H5Gclose(cats);
        H5Gclose(g);
        frames_[frame].push_back(name);
    }

    /// Integer codes with the category names inline in a string-array attribute.
    void inline_categorical(const std::string& frame, const std::string& name, const std::vector<std::string>& categories, const std::vector<std::int32_t>& codes) {
        hid_t g = group(frame);
        hid_t d = dataset(g, name, H5T_NATIVE_INT32, H5T_STD_I32LE, codes.data(), codes.size(), false);
        string_array_attr(d, "categories", categories);
        H5Dclose(d);
        H5Gclose(g);
        frames_[frame].push_back(name);
    }

    void strings(const std::string& frame, const std::string& name, const std::vector<std::string>& values) {
        hid_t g = group(frame);
        string_dataset(g, name, values);
        H5Gclose(g);
        frames_[frame].push_back(name);
    }

    void numeric(const std::string& frame, const std::string& name, const std::vector<double>& values) {
        hid_t g = group(frame);
        dataset(g, name, H5T_NATIVE_DOUBLE, H5T_IEEE_F64LE, values.data(), values.size());
        H5Gclose(g);
        frames_[frame].push_back(name);
    }

    // ---- obsm ----

    void obsm(const std::string& name, std::size_t rows, std::size_t cols, const std::vector<double>& values) {
        hid_t g = group("obsm");
        hsize_t dims[2] = {rows, cols};
        hid_t space = H5Screate_simple(2, dims, nullptr);
        hid_t d = H5Dcreate2(g, name.c_str(), H5T_IEEE_F32LE, space, H5P_DEFAULT, H5P_DEFAULT, H5P_DEFAULT);
        H5Dwrite(d, H5T_NATIVE_DOUBLE, H5S_ALL, H5S_ALL, H5P_DEFAULT, values.data());
        H5Dclose(d);
        H5Sclose(space);
        H5Gclose(g);
    }

    /// Set an arbitrary string attribute on an existing object (for negative tests).
    void set_attr(const std::string& object, const std::string& name, const std::string& value) {
        hid_t o = H5Oopen(file_, object.c_str(), H5P_DEFAULT);
        if (H5Aexists(o, name.c_str()) > 0) {
            H5Adelete(o, name.c_str());
        }
        string_attr(o, name, value);
        H5Oclose(o);
    }

private:
    void sparse(std::int64_t n_obs, std::int64_t n_var, const std::vector<std::int64_t>& indptr, const std::vector<std::int32_t>& indices, const std::vector<float>& data, const std::string& encoding) {
        hid_t g = H5Gcreate2(file_, "X", H5P_DEFAULT, H5P_DEFAULT, H5P_DEFAULT);
        string_attr(g, "encoding-type", encoding);
        string_attr(g, "encoding-version", "0.1.0");
        int64_attr(g, "shape", {n_obs, n_var});
        dataset(g, "data", H5T_NATIVE_FLOAT, H5T_IEEE_F32LE, data.data(), data.size());
        dataset(g, "indices", H5T_NATIVE_INT32, H5T_STD_I32LE, indices.data(), indices.size());
        dataset(g, "indptr", H5T_NATIVE_INT64, H5T_STD_I64LE, indptr.data(), indptr.size());
        H5Gclose(g);
    }

    hid_t group(const std::string& name) {
        if (H5Lexists(file_, name.c_str(), H5P_DEFAULT) > 0) {
            return H5Gopen2(file_, name.c_str(), H5P_DEFAULT);
        }
        hid_t g = H5Gcreate2(file_, name.c_str(), H5P_DEFAULT, H5P_DEFAULT, H5P_DEFAULT);
        if (name == "obs" || name == "var") {
            string_attr(g, "encoding-type", "dataframe");
            string_attr(g, "encoding-version", "0.2.0");
            frames_[name];
        } else {
            string_attr(g, "encoding-type", "dict");
            string_attr(g, "encoding-version", "0.1.0");
        }
        return g;
    }

    static hid_t vlen_type() {
        hid_t t = H5Tcopy(H5T_C_S1);
        H5Tset_size(t, H5T_VARIABLE);
        H5Tset_cset(t, H5T_CSET_UTF8);
        return t;
    }

    static void string_attr(hid_t obj, const std::string& name, const std::string& value) {
        hid_t t = vlen_type();
        hid_t space = H5Screate(H5S_SCALAR);
        hid_t a = H5Acreate2(obj, name.c_str(), t, space, H5P_DEFAULT, H5P_DEFAULT);
        const char* p = value.c_str();
        H5Awrite(a, t, &p);
        H5Aclose(a);
        H5Sclose(space);
        H5Tclose(t);
    }

    static void string_array_attr(hid_t obj, const std::string& name, const std::vector<std::string>& values) {
        hid_t t = vlen_type();
        hsize_t n = values.size();
        hid_t space = n ? H5Screate_simple(1, &n, nullptr) : H5Screate(H5S_NULL);
        hid_t a = H5Acreate2(obj, name.c_str(), t, space, H5P_DEFAULT, H5P_DEFAULT);
        std::vector<const char*> ptrs;
        for (const auto& v : values) {
            ptrs.push_back(v.c_str());
        }
        if (n) {
            H5Awrite(a, t, ptrs.data());
        }
        H5Aclose(a);
        H5Sclose(space);
        H5Tclose(t);
    }

    static void int64_attr(hid_t obj, const std::string& name, const std::vector<std::int64_t>& values) {
        hsize_t n = values.size();
        hid_t space = H5Screate_simple(1, &n, nullptr);
        hid_t a = H5Acreate2(obj, name.c_str(), H5T_STD_I64LE, space, H5P_DEFAULT, H5P_DEFAULT);
        H5Awrite(a, H5T_NATIVE_INT64, values.data());
        H5Aclose(a);
        H5Sclose(space);
    }

    static void string_dataset(hid_t parent, const std::string& name, const std::vector<std::string>& values) {
        hid_t t = vlen_type();
        hsize_t n = values.size();
        hid_t space = H5Screate_simple(1, &n, nullptr);
        hid_t d = H5Dcreate2(parent, name.c_str(), t, space, H5P_DEFAULT, H5P_DEFAULT, H5P_DEFAULT);
        std::vector<const char*> ptrs;
        for (const auto& v : values) {
            ptrs.push_back(v.c_str());
        }
        if (n) {
            H5Dwrite(d, t, H5S_ALL, H5S_ALL, H5P_DEFAULT, ptrs.data());
        }
        string_attr(d, "encoding-type", "string-array");
        string_attr(d, "encoding-version", "0.2.0");
        H5Dclose(d);
        H5Sclose(space);
        H5Tclose(t);
    }

    static hid_t dataset(hid_t parent, const std::string& name, hid_t mem_type, hid_t file_type, const void* data, std::size_t n, bool close = true) {
        hsize_t dims = n;
        hid_t space = H5Screate_simple(1, &dims, nullptr);
        hid_t d = H5Dcreate2(parent, name.c_str(), file_type, space, H5P_DEFAULT, H5P_DEFAULT, H5P_DEFAULT);
        if (n) {
            H5Dwrite(d, mem_type, H5S_ALL, H5S_ALL, H5P_DEFAULT, data);
        }
        H5Sclose(space);
        if (close) {
            H5Dclose(d);
            return -1;
        }
        return d;
    }

    hid_t file_ = -1;
    std::map<std::string, std::vector<std::string>> frames_;
};

}

#endif
