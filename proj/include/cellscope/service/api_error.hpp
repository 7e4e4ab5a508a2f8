#ifndef CELLSCOPE_SERVICE_API_ERROR_HPP
#define CELLSCOPE_SERVICE_API_ERROR_HPP

#include "../error.hpp"

#include <nlohmann/json.hpp>

#include <string>

namespace cellscope::service {

enum class ApiCode { NotFound, BadRequest, Conflict, UpstreamUnavailable, Internal };

inline std::string_view to_string(ApiCode c) {
    switch (c) {
        case ApiCode::NotFound: return "not_found";
        case ApiCode::BadRequest: return "bad_request";
        case ApiCode::Conflict: return "conflict";
        case ApiCode::UpstreamUnavailable: return "upstream_unavailable";
        case ApiCode::Internal: return "internal";
    }
    return "internal";
}

inline int http_status(ApiCode c) {
    switch (c) {
        case ApiCode::NotFound: return 404;
        case ApiCode::BadRequest: return 400;
        case ApiCode::Conflict: return 409;
        case ApiCode::UpstreamUnavailable: return 502;
        case ApiCode::Internal: return 500;
    }
    return 500;
}

/**
 * Error body sent to clients: {"code": ..., "message": ..., "detail": ...}.
 * `detail` always names the library error kind and may carry more fields.
 */
struct ApiError {
    ApiCode code = ApiCode::Internal;
    std::string message;
    nlohmann::json detail = nlohmann::json::object();

    nlohmann::json to_json() const {
        return {{"code", to_string(code)}, {"message", message}, {"detail", detail}};
    }
};

inline ApiCode api_code(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::UnknownDataset:
        case ErrorKind::NotFound:
        case ErrorKind::IndexOutOfRange:
            return ApiCode::NotFound;
        case ErrorKind::BadRequest:
        case ErrorKind::SelectionTooSmall:
        case ErrorKind::GroupTooSmall:
        case ErrorKind::DegeneratePolygon:
        case ErrorKind::NonPositiveRadius:
        case ErrorKind::NonFiniteCoordinate:
        case ErrorKind::EmptyPointSet:
        case ErrorKind::NoAssetAvailable:
        case ErrorKind::FileNotReadable:
        case ErrorKind::NotAnnData:
        case ErrorKind::UnsupportedEncoding:
        case ErrorKind::DimensionMismatch:
        case ErrorKind::InvalidData:
            return ApiCode::BadRequest;
        case ErrorKind::Conflict:
        case ErrorKind::IllegalState:
            return ApiCode::Conflict;
        case ErrorKind::NetworkUnavailable:
        case ErrorKind::MalformedResponse:
        case ErrorKind::ChecksumMismatch:
            return ApiCode::UpstreamUnavailable;
        default:
            return ApiCode::Internal;
    }
}

inline ApiError to_api_error(const Error& e) {
    return {api_code(e.kind()), e.what(), {{"kind", to_string(e.kind())}}};
}

}

#endif
