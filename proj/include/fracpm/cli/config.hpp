#pragma once

#include "fracpm/common.hpp"

#include <map>
#include <string>
#include <variant>
#include <vector>

namespace fracpm::cli
{

/// A value of the TOML subset: string, number, boolean or (nested) array.
struct Value
{
  std::variant<std::string, double, bool, std::vector<Value>> data;
  int line = 0;

  bool is_string() const { return std::holds_alternative<std::string>( data ); }
  bool is_number() const { return std::holds_alternative<double>( data ); }
  bool is_bool() const { return std::holds_alternative<bool>( data ); }
  bool is_array() const { return std::holds_alternative<std::vector<Value>>( data ); }

  std::string const & as_string() const { return std::get<std::string>( data ); }
  double as_number() const { return std::get<double>( data ); }
  bool as_bool() const { return std::get<bool>( data ); }
  std::vector<Value> const & as_array() const { return std::get<std::vector<Value>>( data ); }
};

using Table = std::map<std::string, Value>;

/**
 * Parsed config text. Keys before the first header live in section "". Section names are
 * kept verbatim, so [bc.flow] is the section "bc.flow".
 */
struct Config
{
  std::map<std::string, Table> sections;

  bool has( std::string const & section ) const { return sections.count( section ) > 0; }
  /// Empty table when the section is absent.
  Table const & section( std::string const & name ) const;
};

/**
 * Parse TOML subset text: [section] headers with dotted names, `key = value` pairs with
 * bare or quoted keys, basic and literal strings, integers and floats (with underscores,
 * exponents, inf/nan), booleans, arrays (nested, multi-line, trailing comma) and `#` comments.
 * Throws ValidationError naming the source and line.
 */
Config parse_config( std::string const & text, std::string const & source = "<config>" );
Config load_config( std::string const & path );

/// Render a value back as TOML-style text (used for config echo).
std::string to_text( Value const & v );

} // namespace fracpm::cli
