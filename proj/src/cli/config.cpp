#include "fracpm/cli/config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace fracpm::cli
{

Table const & Config::section( std::string const & name ) const
{
  static Table const empty;
  auto it = sections.find( name );
  return it == sections.end() ? empty : it->second;
}

namespace
{

bool bare_key_char( char ch )
{
  return std::isalnum( static_cast< unsigned char >( ch ) ) || ch == '_' || ch == '-';
}

class Parser
{
public:
  Parser( std::string const & text, std::string source ) : m_text( text ), m_source( std::move( source ) ) {}

  Config run()
  {
    Config cfg;
    std::string section;
    cfg.sections[section];
    while( true )
    {
      skip_blank_lines();
      if( eof() )
      {
        break;
      }
      if( peek() == '[' )
      {
        ++m_pos;
        skip_spaces();
        section = parse_dotted_key();
        skip_spaces();
        expect( ']' );
        if( cfg.sections.count( section ) && !cfg.sections[section].empty() )
        {
          fail( "duplicate section [" + section + "]" );
        }
        cfg.sections[section];
      }
      else
      {
        std::string const key = parse_key();
        skip_spaces();
        expect( '=' );
        skip_spaces();
        int const line = m_line;
        Value v = parse_value();
        v.line = line;
        auto & table = cfg.sections[section];
        if( table.count( key ) )
        {
          fail( "duplicate key '" + key + "'" );
        }
        table.emplace( key, std::move( v ) );
      }
      end_of_line();
    }
    return cfg;
  }

private:
  [[noreturn]] void fail( std::string const & what ) const
  {
    throw ValidationError( m_source + ":" + std::to_string( m_line ) + ": " + what );
  }

  bool eof() const { return m_pos >= m_text.size(); }
  char peek() const { return eof() ? '\0' : m_text[m_pos]; }

  char get()
  {
    char const ch = m_text[m_pos++];
    if( ch == '\n' )
    {
      ++m_line;
    }
    return ch;
  }

  void expect( char ch )
  {
    if( peek() != ch )
    {
      fail( std::string( "expected '" ) + ch + "'" );
    }
    get();
  }

  void skip_spaces()
  {
    while( peek() == ' ' || peek() == '\t' )
    {
      get();
    }
  }

  void skip_comment()
  {
    if( peek() == '#' )
    {
      while( !eof() && peek() != '\n' )
      {
        get();
      }
    }
  }

  void skip_blank_lines()
  {
    while( !eof() )
    {
      skip_spaces();
      skip_comment();
      if( peek() == '\n' || peek() == '\r' )
      {
        get();
      }
      else
      {
        break;
      }
    }
  }

  /// Whitespace, comments and newlines inside arrays.
  void skip_all()
  {
    while( !eof() )
    {
      char const ch = peek();
      if( ch == ' ' || ch == '\t' || ch == '\n' || ch == '\r' )
      {
        get();
      }
      else if( ch == '#' )
      {
        skip_comment();
      }
      else
      {
        break;
      }
    }
  }

  void end_of_line()
  {
    skip_spaces();
    skip_comment();
    if( peek() == '\r' )
    {
      get();
    }
    if( !eof() && peek() != '\n' )
    {
      fail( "unexpected text after value" );
    }
  }

  std::string parse_key()
  {
    if( peek() == '"' )
    {
      ++m_pos;
      return parse_basic_string_body();
    }
    if( peek() == '\'' )
    {
      ++m_pos;
      return parse_literal_string_body();
    }
    std::string key;
    while( bare_key_char( peek() ) )
    {
      key += get();
    }
    if( key.empty() )
    {
      fail( "expected a key" );
    }
    return key;
  }

  std::string parse_dotted_key()
  {
    std::string name = parse_key();
    skip_spaces();
    while( peek() == '.' )
    {
      get();
      skip_spaces();
      name += "." + parse_key();
      skip_spaces();
    }
    return name;
  }

  std::string parse_basic_string_body()
  {
    std::string out;
    while( true )
    {
      if( eof() || peek() == '\n' )
      {
        fail( "unterminated string" );
      }
      char const ch = get();
      if( ch == '"' )
      {
        return out;
      }
      if( ch != '\\' )
      {
        out += ch;
        continue;
      }
      if( eof() )
      {
        fail( "unterminated string" );
      }
      switch( char const esc = get() )
      {
        case 'n': out += '\n'; break;
        case 't': out += '\t'; break;
        case 'r': out += '\r'; break;
        case '"': out += '"'; break;
        case '\\': out += '\\'; break;
        default: fail( std::string( "unsupported escape \\" ) + esc );
      }
    }
  }

  std::string parse_literal_string_body()
  {
    std::string out;
    while( true )
    {
      if( eof() || peek() == '\n' )
      {
        fail( "unterminated string" );
      }
      char const ch = get();
      if( ch == '\'' )
      {
        return out;
      }
      out += ch;
    }
  }

  Value parse_value()
  {
    Value v;
    v.line = m_line;
    char const ch = peek();
    if( ch == '"' )
    {
      get();
      v.data = parse_basic_string_body();
    }
    else if( ch == '\'' )
    {
      get();
      v.data = parse_literal_string_body();
    }
    else if( ch == '[' )
    {
      get();
      std::vector<Value> items;
      skip_all();
      while( peek() != ']' )
      {
        if( eof() )
        {
          fail( "unterminated array" );
        }
        items.push_back( parse_value() );
        skip_all();
        if( peek() == ',' )
        {
          get();
          skip_all();
        }
        else if( eof() )
        {
          fail( "unterminated array" );
        }
        else if( peek() != ']' )
        {
          fail( "expected ',' or ']' in array" );
        }
      }
      get();
      v.data = std::move( items );
    }
    else if( ch == '{' )
    {
      fail( "inline tables are not supported" );
    }
    else
    {
      std::string word;
      while( !eof() && ( bare_key_char( peek() ) || peek() == '.' || peek() == '+' ) )
      {
        word += get();
      }
      if( word == "true" || word == "false" )
      {
        v.data = word == "true";
      }
      else
      {
        v.data = parse_number( word );
      }
    }
    return v;
  }

  double parse_number( std::string word )
  {
    if( word.empty() )
    {
      fail( "expected a value" );
    }
    std::string digits;
    for( std::size_t i = 0; i < word.size(); ++i )
    {
      if( word[i] == '_' )
      {
        bool const ok = i > 0 && i + 1 < word.size() && std::isdigit( static_cast< unsigned char >( word[i - 1] ) ) &&
                        std::isdigit( static_cast< unsigned char >( word[i + 1] ) );
        if( !ok )
        {
          fail( "misplaced '_' in number '" + word + "'" );
        }
        continue;
      }
      digits += word[i];
    }
    double sign = 1.0;
    std::string body = digits;
    if( !body.empty() && ( body[0] == '+' || body[0] == '-' ) )
    {
      sign = body[0] == '-' ? -1.0 : 1.0;
      body = body.substr( 1 );
    }
    if( body == "inf" )
    {
      return sign * std::numeric_limits<double>::infinity();
    }
    if( body == "nan" )
    {
      return std::numeric_limits<double>::quiet_NaN();
    }
    double value = 0.0;
    auto const [ptr, ec] = std::from_chars( body.data(), body.data() + body.size(), value );
    if( ec != std::errc() || ptr != body.data() + body.size() || body.empty() ||
        !( std::isdigit( static_cast< unsigned char >( body[0] ) ) ) )
    {
      fail( "invalid value '" + word + "'" );
    }
    return sign * value;
  }

  std::string const & m_text;
  std::string m_source;
  std::size_t m_pos = 0;
  int m_line = 1;
};

} // namespace

Config parse_config( std::string const & text, std::string const & source )
{
  return Parser( text, source ).run();
}

Config load_config( std::string const & path )
{
  std::ifstream in( path, std::ios::binary );
  if( !in )
  {
    throw ValidationError( "cannot open config file '" + path + "'" );
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config( ss.str(), path );
}

std::string to_text( Value const & v )
{
  if( v.is_string() )
  {
    std::string out = "\"";
    for( char ch : v.as_string() )
    {
      if( ch == '"' || ch == '\\' )
      {
        out += '\\';
      }
      out += ch;
    }
    return out + "\"";
  }
  if( v.is_bool() )
  {
    return v.as_bool() ? "true" : "false";
  }
  if( v.is_number() )
  {
    std::ostringstream ss;
    ss.precision( 17 );
    ss << v.as_number();
    return ss.str();
  }
  std::string out = "[";
  bool first = true;
  for( auto const & item : v.as_array() )
  {
    out += first ? "" : ", ";
    first = false;
    out += to_text( item );
  }
  return out + "]";
}

} // namespace fracpm::cli
